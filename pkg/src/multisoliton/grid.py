"""Uniform periodic grids and sampled fields."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic sampling of ``[x_min, x_max)`` with ``n`` points.

    The right end point is identified with the left one, so ``dx`` is
    ``(x_max - x_min) / n``.
    """

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise InvalidParameterError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise InvalidParameterError(
                f"empty interval: x_max={self.x_max} <= x_min={self.x_min}")
        n = self.n
        if int(n) != n or n < 64 or (int(n) & (int(n) - 1)) != 0:
            raise InvalidParameterError(
                f"n={n} must be a power of two and at least 64")

    @property
    def length(self):
        return self.x_max - self.x_min

    @property
    def dx(self):
        return self.length / self.n

    @cached_property
    def x(self):
        return self.x_min + self.dx * np.arange(self.n)

    @cached_property
    def k(self):
        """Angular wavenumbers in numpy FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @cached_property
    def k_real(self):
        """Angular wavenumbers for ``rfft`` output."""
        return 2 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)

    @property
    def k_max(self):
        return np.pi / self.dx

    def refine(self, factor=2):
        return Grid1D(self.x_min, self.x_max, self.n * factor)


def make_grid(x_min, x_max, n):
    """Build a validated :class:`Grid1D`."""
    return Grid1D(float(x_min), float(x_max), int(n) if int(n) == n else n)


@dataclass(frozen=True, eq=False)
class Field:
    """Samples of a real or complex function on a :class:`Grid1D`.

    ``meta`` carries free-form provenance (for instance separation
    warnings collected while building initial data).
    """

    grid: Grid1D
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.grid.n,):
            raise InvalidParameterError(
                f"field has shape {values.shape}, grid expects ({self.grid.n},)")
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("field contains non-finite samples")
        object.__setattr__(self, "values", values)

    @property
    def is_complex(self):
        return np.iscomplexobj(self.values)

    @property
    def x(self):
        return self.grid.x

    def with_values(self, values):
        return Field(self.grid, values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __add__(self, other):
        _check_same_grid(self, other)
        return Field(self.grid, self.values + other.values)


RealField = Field
ComplexField = Field


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise InvalidParameterError("fields live on different grids")


def zeros(grid, complex_=False):
    return Field(grid, np.zeros(grid.n, dtype=complex if complex_ else float))

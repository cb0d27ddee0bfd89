"""Ground states and solitons of gKdV and 1-D NLS.

The gKdV ground state solves ``Q'' + Q^p = Q``::

    Q(x) = ((p + 1) / (2 cosh^2((p - 1) x / 2)))^(1 / (p - 1))

and the soliton of speed ``c`` is ``Q_c(x - c t - x0)`` with
``Q_c(x) = c^(1/(p-1)) Q(sqrt(c) x)``. The 1-D NLS ground state of
frequency ``omega`` is the same profile with ``c`` replaced by ``omega``
(real ``p > 1`` allowed).
"""

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from numpy.polynomial import Polynomial
from scipy import fft as sp_fft

from .errors import InvalidParameterError, ResolutionError
from .grid import Field
from .spectral import (check_resolved, derivative_values, noise_cutoff,
                       sobolev_sum)

NOISE_REL = 1e-14
LD_NOISE_REL = 3e-19


@dataclass(frozen=True)
class SolitonParams:
    """gKdV soliton ``Q_c(x - c t - x0)``."""

    p: int
    c: float
    x0: float = 0.0

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 2:
            raise InvalidParameterError(f"p must be an integer >= 2, got {self.p}")
        if not self.c > 0:
            raise InvalidParameterError(f"speed c must be positive, got {self.c}")

    def center(self, t):
        return self.c * t + self.x0


@dataclass(frozen=True)
class NlsSolitonParams:
    """NLS soliton ``Q_omega(x - x0 - v t) exp(i(v x / 2 + (omega - v^2/4) t + gamma))``."""

    p: float
    omega: float
    v: float = 0.0
    gamma: float = 0.0
    x0: float = 0.0

    def __post_init__(self):
        if not self.p > 1:
            raise InvalidParameterError(f"p must exceed 1, got {self.p}")
        if not self.omega > 0:
            raise InvalidParameterError(f"omega must be positive, got {self.omega}")

    def center(self, t):
        return self.x0 + self.v * t


@dataclass(frozen=True)
class GroundStateSpec:
    equation: str
    p: float
    scale: float = 1.0

    def __post_init__(self):
        if self.equation not in ("gkdv", "nls"):
            raise InvalidParameterError(f"unknown equation {self.equation!r}")
        if not self.scale > 0:
            raise InvalidParameterError("scale must be positive")
        if self.equation == "gkdv":
            _check_gkdv_p(self.p)
        elif not self.p > 1:
            raise InvalidParameterError("NLS exponent must exceed 1")

    def evaluate(self, x, s=0):
        return profile_derivative(self.p, self.scale, x, s)


def _check_gkdv_p(p):
    if int(p) != p or p < 2:
        raise InvalidParameterError(f"p must be an integer >= 2, got {p}")


def _log_sech(y):
    ay = np.abs(y)
    return math.log(2.0) - ay - np.log1p(np.exp(-2.0 * ay))


def _profile(p, scale, x):
    # log-domain evaluation: exact relative accuracy deep in the tails
    p = float(p)
    x = np.asarray(x, dtype=float)
    amp = math.log(scale * (p + 1) / 2) / (p - 1)
    y = 0.5 * (p - 1) * math.sqrt(scale) * x
    return np.exp(amp + 2.0 / (p - 1) * _log_sech(y))


def ground_state(p, x):
    """``Q(x)`` for integer ``p >= 2``.

    >>> float(ground_state(2, 0.0))
    1.5
    """
    _check_gkdv_p(p)
    return _profile(p, 1.0, x)


def ground_state_scaled(p, c, x):
    """``Q_c(x) = c^(1/(p-1)) Q(sqrt(c) x)``; solves ``Q_c'' + Q_c^p = c Q_c``."""
    _check_gkdv_p(p)
    if not c > 0:
        raise InvalidParameterError(f"c must be positive, got {c}")
    return _profile(p, c, x)


def nls_ground_state(p, omega, x):
    """Positive even solution of ``Q'' + Q^p = omega Q`` on the line."""
    if not p > 1:
        raise InvalidParameterError(f"p must exceed 1, got {p}")
    if not omega > 0:
        raise InvalidParameterError(f"omega must be positive, got {omega}")
    return _profile(p, omega, x)


def _sech_power_polys(a, b, s_max):
    # d^s/dy^s sech(b y)^a = sech(b y)^a * P_s(tanh(b y))
    polys = [Polynomial([1.0])]
    one_minus_t2 = Polynomial([1.0, 0.0, -1.0])
    t = Polynomial([0.0, 1.0])
    for _ in range(s_max):
        P = polys[-1]
        polys.append(b * (-a * t * P + one_minus_t2 * P.deriv()))
    return polys


def profile_polynomials(p, s_max):
    """Polynomials ``P_s`` with ``Q^(s)(x) = Q(x) P_s(tanh((p-1)x/2))``."""
    p = float(p)
    return _sech_power_polys(2.0 / (p - 1), 0.5 * (p - 1), s_max)


def profile_derivative(p, scale, x, s=0):
    """Closed-form ``d^s/dx^s`` of the scaled ground state.

    Exact up to roundoff: the derivative is the profile times a
    polynomial in ``tanh``, so no differencing is involved.
    """
    x = np.asarray(x, dtype=float)
    base = _profile(p, scale, x)
    if s == 0:
        return base
    poly = profile_polynomials(p, s)[s]
    rs = math.sqrt(scale)
    th = np.tanh(0.5 * (float(p) - 1) * rs * x)
    return base * poly(th) * rs ** s


def ground_state_derivative(p, x, s=0, c=1.0):
    _check_gkdv_p(p)
    return profile_derivative(p, c, x, s)


def soliton_field(params, t, grid):
    """Sample ``R_{c,x0}(t, .)`` on ``grid``."""
    y = grid.x - params.center(t)
    return Field(grid, _profile(params.p, params.c, y))


def soliton_derivative(params, t, grid, s):
    """``d^s/dx^s`` of the sampled soliton, computed spectrally.

    Raises :class:`ResolutionError` when the differentiated spectrum
    leaks into the top band of wavenumbers.
    """
    if s < 0:
        raise InvalidParameterError("derivative order must be nonnegative")
    base = soliton_field(params, t, grid)
    if s == 0:
        return base
    f_hat = noise_cutoff(np.fft.fft(base.values), grid.k, NOISE_REL)
    check_resolved((1j * grid.k) ** s * f_hat, grid.k,
                   what=f"soliton derivative of order {s}")
    return Field(grid, derivative_values(base.values, grid, s, f_hat=f_hat))


def nls_soliton_field(params, t, grid):
    """Sample the boosted, phase-modulated NLS soliton."""
    x = grid.x
    env = _profile(params.p, params.omega, x - params.center(t))
    phase = 0.5 * params.v * x + (params.omega - 0.25 * params.v ** 2) * t + params.gamma
    return Field(grid, env * np.exp(1j * phase))


def hs_norm_squared(field, s, guard=True, noise_rel=NOISE_REL):
    """``sum_{j=0..s} ||d^j f||_{L^2}^2`` on the periodic grid."""
    if s < 0:
        raise InvalidParameterError("s must be nonnegative")
    return sobolev_sum(field, s, guard=guard, noise_rel=noise_rel)


def hs_norm(field, s, guard=True, noise_rel=NOISE_REL):
    """``H^s`` norm as the root of the summed derivative energies."""
    return math.sqrt(hs_norm_squared(field, s, guard=guard, noise_rel=noise_rel))


def _compositions(total, parts):
    for head in product(range(total + 1), repeat=parts - 1):
        rest = total - sum(head)
        if rest >= 0:
            yield head + (rest,)


def _multinomial(n, parts):
    out = math.factorial(n)
    for k in parts:
        out //= math.factorial(k)
    return out


def _ground_state_ld(p, x):
    # extended-precision twin of _profile (scale 1)
    ld = np.longdouble
    p = ld(p)
    ay = np.abs((p - 1) / 2 * x)
    log_sech = np.log(ld(2)) - ay - np.log1p(np.exp(-2 * ay))
    return np.exp(np.log((p + 1) / 2) / (p - 1) + 2 / (p - 1) * log_sech)


def _ground_state_derivatives(p, s_max, grid):
    # High-order multipliers k^s amplify FFT roundoff, so the check runs
    # in extended precision and strips the resulting noise floor.
    x = grid.x_min + np.longdouble(grid.length) / grid.n * np.arange(grid.n)
    q = _ground_state_ld(p, x)
    k = 2 * np.pi * np.fft.fftfreq(grid.n, d=grid.dx)
    f_hat = noise_cutoff(sp_fft.fft(q), k, LD_NOISE_REL)
    check_resolved((1j * k) ** s_max * f_hat.astype(complex), k,
                   what=f"Q^({s_max})")
    kl = k.astype(np.longdouble)
    out = [q]
    for j in range(1, s_max + 1):
        mult = (1j * kl) ** j
        if j % 2 == 1:
            mult[grid.n // 2] = 0
        out.append(sp_fft.ifft(mult * f_hat).real)
    return out


def hs_recursion_residual(p, s, grid):
    """Max residual of the differentiated ground-state equation.

    Compares ``Q^(s+2)`` with
    ``Q^(s) - sum multinomial(s; i) Q^(i_1) ... Q^(i_p)``, both sides
    built from spectral derivatives of the sampled profile.
    """
    _check_gkdv_p(p)
    if s < 0:
        raise InvalidParameterError("s must be nonnegative")
    p = int(p)
    d = _ground_state_derivatives(p, s + 2, grid)
    rhs = d[s].copy()
    for idx in _compositions(s, p):
        term = np.full(grid.n, _multinomial(s, idx), dtype=np.longdouble)
        for i in idx:
            term = term * d[i]
        rhs -= term
    return float(np.max(np.abs(d[s + 2] - rhs)))


def hs_growth_ratios(p, s_max, grid):
    """``||Q||_{H^{s+2}} / (p^s ||Q||_{H^s}^p)`` for ``s = 0..s_max``."""
    _check_gkdv_p(p)
    q = Field(grid, ground_state(p, grid.x))
    norms = [hs_norm(q, s) for s in range(s_max + 3)]
    return np.array([norms[s + 2] / (p ** s * norms[s] ** p) for s in range(s_max + 1)])


__all__ = [
    "SolitonParams", "NlsSolitonParams", "GroundStateSpec", "ground_state",
    "ground_state_scaled", "ground_state_derivative", "profile_derivative",
    "profile_polynomials", "soliton_field", "soliton_derivative",
    "nls_ground_state", "nls_soliton_field", "hs_norm", "hs_norm_squared",
    "hs_recursion_residual", "hs_growth_ratios", "ResolutionError",
]

"""Exception hierarchy shared by every module of the package."""


class SolitonLabError(Exception):
    """Base class for all errors raised by multisoliton."""


class InvalidParameterError(SolitonLabError, ValueError):
    """A parameter violates a documented invariant."""


class SchemaError(InvalidParameterError):
    """A scenario document does not match the schema.

    ``path`` names the offending field, e.g. ``solitons[1].c``.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class ResolutionError(SolitonLabError):
    """The grid does not resolve the requested spectral operation."""


class PrecisionLossError(SolitonLabError):
    """A linear solve is too ill-conditioned to trust."""


class QuadratureToleranceError(SolitonLabError):
    """Successive quadrature refinements disagree beyond tolerance."""


class BoundaryLeakError(SolitonLabError):
    """A field is not negligible at the ends of the periodic box."""


class WindowEmptyError(SolitonLabError):
    """A decay fit window holds too few admissible samples."""


class DegenerateFitError(SolitonLabError):
    """Too few values above the quadrature floor to fit a rate."""


class SnapshotNotFoundError(SolitonLabError, KeyError):
    """No snapshot of a run matches the requested time."""

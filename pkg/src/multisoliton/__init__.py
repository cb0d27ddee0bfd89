"""Multi-soliton numerics for gKdV and NLS."""

__version__ = "0.1.0"

"""Convergence rate and region parameters.

``theta = min{c_1, c_2 - c_1, ..., c_N - c_{N-1}}^(3/2) / 32`` and

``kappa_{alpha,beta} = min{sqrt(c_1), theta/(c_1 - alpha), theta/(beta - c_N),
theta / (c_{j+1} - c_j)}``.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameterError


def _speeds(c):
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.size == 0:
        raise InvalidParameterError("speed list is empty")
    if not np.all(np.isfinite(c)) or np.any(c <= 0):
        raise InvalidParameterError("speeds must be positive")
    bad = np.flatnonzero(np.diff(c) <= 0)
    if bad.size:
        i = int(bad[0]) + 1
        raise InvalidParameterError(
            f"speeds must be strictly increasing: c[{i}]={c[i]} <= c[{i - 1}]={c[i - 1]}")
    return c


def theta(c):
    """Universal exponential rate of convergence to the soliton sum.

    >>> theta([1.0, 4.0])
    0.03125
    """
    c = _speeds(c)
    m = min(c[0], np.diff(c).min()) if c.size > 1 else c[0]
    return float(m ** 1.5 / 32.0)


def kappa_alpha_beta(c, alpha, beta):
    """Exponential rate valid between the lines ``x = alpha t`` and ``x = beta t``."""
    c = _speeds(c)
    if not 0 < alpha < c[0]:
        raise InvalidParameterError(f"need 0 < alpha < c_1, got alpha={alpha}, c_1={c[0]}")
    if not beta > c[-1]:
        raise InvalidParameterError(f"need beta > c_N, got beta={beta}, c_N={c[-1]}")
    th = theta(c)
    cands = [math.sqrt(c[0]), th / (c[0] - alpha), th / (beta - c[-1])]
    if c.size > 1:
        cands.append(float(np.min(th / np.diff(c))))
    return float(min(cands))


@dataclass(frozen=True)
class RateParams:
    """Rates and region/weight parameters for one speed configuration."""

    speeds: tuple
    alpha: float
    beta: float
    eta: float
    kappa_alpha: float
    kappa: float
    delta: float
    theta: float
    kappa_alpha_beta: float

    @property
    def n(self):
        return len(self.speeds)


def make_rate_params(speeds, alpha=None, beta=None, eta=None, kappa_alpha=None,
                     kappa=None, delta=None):
    """Validated :class:`RateParams` with defaults.

    Defaults: ``alpha = c_1/2``, ``beta = c_N + 1``, ``eta = c_1/2``,
    ``kappa_alpha = sqrt(alpha)/4``, ``kappa = 2 kappa_alpha`` and
    ``delta = (alpha - kappa^2)/2``.
    """
    c = _speeds(speeds)
    alpha = float(c[0] / 2 if alpha is None else alpha)
    beta = float(c[-1] + 1.0 if beta is None else beta)
    eta = float(c[0] / 2 if eta is None else eta)
    if not 0 < alpha < c[0]:
        raise InvalidParameterError(f"alpha={alpha} violates the constraint 0 < alpha < c_1 = {c[0]}")
    if not beta > c[-1]:
        raise InvalidParameterError(f"beta={beta} violates the constraint beta > c_N = {c[-1]}")
    if not 0 < eta < c[0]:
        raise InvalidParameterError(f"eta={eta} violates the constraint 0 < eta < c_1 = {c[0]}")
    ka = math.sqrt(alpha) / 4 if kappa_alpha is None else float(kappa_alpha)
    if not 0 < ka < math.sqrt(alpha) / 2:
        raise InvalidParameterError(
            f"kappa_alpha={ka} violates the constraint 0 < kappa_alpha < sqrt(alpha)/2")
    kappa = 2 * ka if kappa is None else float(kappa)
    if not (kappa > 0 and kappa ** 2 < alpha):
        raise InvalidParameterError(f"kappa={kappa} violates the constraint kappa^2 < alpha")
    delta = (alpha - kappa ** 2) / 2 if delta is None else float(delta)
    if not 0 < delta < alpha - kappa ** 2:
        raise InvalidParameterError(
            f"delta={delta} violates the constraint 0 < delta < alpha - kappa^2")
    return RateParams(tuple(float(v) for v in c), alpha, beta, eta, ka, kappa, delta,
                      theta(c), kappa_alpha_beta(c, alpha, beta))


@dataclass(frozen=True)
class NlsRateParams:
    """``beta > max |v_j|`` and ``0 < eta <= min omega_j`` for NLS weights."""

    omegas: tuple
    velocities: tuple
    beta: float
    eta: float


def make_nls_rate_params(omegas, velocities, beta=None, eta=None):
    om = np.atleast_1d(np.asarray(omegas, dtype=float))
    v = np.atleast_1d(np.asarray(velocities, dtype=float))
    if om.size != v.size or om.size == 0:
        raise InvalidParameterError("omegas and velocities must be nonempty and equally long")
    if np.any(om <= 0):
        raise InvalidParameterError("omegas must be positive")
    beta = float(np.max(np.abs(v)) + 1.0) if beta is None else float(beta)
    eta = float(om.min() / 2) if eta is None else float(eta)
    if not beta > np.max(np.abs(v)):
        raise InvalidParameterError(f"beta={beta} violates the constraint beta > max|v_j|")
    if not 0 < eta <= om.min():
        raise InvalidParameterError(f"eta={eta} violates the constraint 0 < eta <= min omega_j")
    return NlsRateParams(tuple(om), tuple(v), beta, eta)

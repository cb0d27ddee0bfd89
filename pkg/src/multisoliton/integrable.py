"""Exact KdV (p = 2) N-solitons from the determinant formula.

``u = 6 d^2/dx^2 ln det M`` with ``M_ij = delta_ij + b_ij exp(theta_i + theta_j)``,
``b_ij = 2 (c_i c_j)^(1/4) / (sqrt(c_i) + sqrt(c_j))`` and
``theta_i = (sqrt(c_i) (x - c_i t) + x_i) / 2``.

Two independent evaluation routes are provided:

* trace route: ``d^2 ln det M = tr(M^-1 M_xx) - tr((M^-1 M_x)^2)`` on a
  similarity-rescaled matrix that never overflows;
* cumulant route: ``det M = sum_S det(B_S) exp(2 sum_{i in S} theta_i)``
  over index subsets, so ``d^n ln det M`` is the n-th cumulant of
  ``lambda_S = sum_{i in S} sqrt(c_i)`` under weights proportional to
  the terms. This gives every x-derivative of ``u`` in closed form.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import mpmath
import numpy as np
from scipy.special import logsumexp

from .errors import InvalidParameterError, PrecisionLossError
from .grid import Field

OVERFLOW_THETA = 175.0
COND_LIMIT = 1e12


@dataclass(frozen=True)
class KdvNSolitonSpec:
    """Speeds ``0 < c_1 < ... < c_N`` and phase shifts ``x_1..x_N``."""

    speeds: tuple
    shifts: tuple = None

    def __post_init__(self):
        c = tuple(float(v) for v in self.speeds)
        if len(c) < 1:
            raise InvalidParameterError("at least one soliton is required")
        shifts = (0.0,) * len(c) if self.shifts is None else tuple(float(v) for v in self.shifts)
        if len(shifts) != len(c):
            raise InvalidParameterError("speeds and shifts differ in length")
        for i, ci in enumerate(c):
            if not ci > 0 or not math.isfinite(ci):
                raise InvalidParameterError(f"speeds[{i}] must be positive, got {ci}")
            if i and not ci > c[i - 1]:
                raise InvalidParameterError(
                    f"speeds must be strictly increasing: speeds[{i}]={ci} <= {c[i - 1]}")
        if not all(math.isfinite(v) for v in shifts):
            raise InvalidParameterError("shifts must be finite")
        object.__setattr__(self, "speeds", c)
        object.__setattr__(self, "shifts", shifts)

    @property
    def n(self):
        return len(self.speeds)

    @property
    def sqrt_c(self):
        return np.sqrt(np.array(self.speeds))

    @property
    def b(self):
        r = np.sqrt(self.sqrt_c)
        sc = self.sqrt_c
        return 2.0 * np.outer(r, r) / (sc[:, None] + sc[None, :])

    def theta(self, t, x):
        """Phases ``theta_i``; shape ``x.shape + (N,)``."""
        x = np.asarray(x, dtype=float)[..., None]
        sc = self.sqrt_c
        return 0.5 * (sc * (x - np.array(self.speeds) * t) + np.array(self.shifts))


@dataclass(frozen=True)
class TauMatrix:
    """``M(t, x)`` together with its phases.

    ``overflow`` is set when ``max theta`` is large enough that the raw
    entries are unusable in double precision.
    """

    matrix: np.ndarray
    theta: np.ndarray
    overflow: bool


def tau_matrix(spec, t, x):
    """Raw matrix ``M`` at one point ``(t, x)``."""
    th = spec.theta(t, float(x))
    overflow = bool(th.max() > OVERFLOW_THETA)
    with np.errstate(over="ignore"):
        e = np.exp(th)
        m = np.eye(spec.n) + spec.b * np.outer(e, e)
    return TauMatrix(m, th, overflow)


def _scaled_system(spec, t, x):
    # M = S Mt S with S = diag(exp(max(theta, 0))), so
    # ln det M = 2 sum max(theta, 0) + ln det Mt and the affine first term
    # drops out of the second derivative.
    th = spec.theta(t, x)
    a = 0.5 * spec.sqrt_c
    pos = th > 0
    m = np.where(pos, th, 0.0)
    nn = np.where(pos, 0.0, th)
    dm = np.where(pos, a, 0.0)
    dn = np.where(pos, 0.0, a)
    eye = np.eye(spec.n)
    dsum = dn[..., :, None] + dn[..., None, :]
    off = spec.b * np.exp(nn[..., :, None] + nn[..., None, :])
    e2m = np.exp(-2.0 * m)
    mt = eye * e2m[..., None, :] + off
    mt_x = eye * (-2.0 * dm * e2m)[..., None, :] + off * dsum
    mt_xx = eye * (4.0 * dm ** 2 * e2m)[..., None, :] + off * dsum ** 2
    return mt, mt_x, mt_xx


def kdv_nsoliton_values(spec, t, x, check=True):
    """Vectorised trace-route evaluation of ``u(t, x)``.

    Raises :class:`PrecisionLossError` if any rescaled matrix has
    condition number above ``1e12``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mt, mt_x, mt_xx = _scaled_system(spec, t, x)
    if check:
        sign, _ = np.linalg.slogdet(mt)
        if np.any(sign <= 0):
            raise PrecisionLossError("det M lost positivity")
        cond = np.linalg.cond(mt)
        if np.any(cond > COND_LIMIT):
            i = int(np.argmax(cond))
            raise PrecisionLossError(
                f"cond(M) = {cond[i]:.3e} exceeds {COND_LIMIT:.0e} at x = {x[i]}")
    a1 = np.linalg.solve(mt, mt_x)
    a2 = np.linalg.solve(mt, mt_xx)
    tr2 = np.trace(a2, axis1=-2, axis2=-1)
    tr11 = np.einsum("...ij,...ji->...", a1, a1)
    return 6.0 * (tr2 - tr11)


def kdv_nsoliton(spec, t, x):
    """``u(t, x)`` at a single point."""
    return float(kdv_nsoliton_values(spec, t, [x])[0])


def kdv_nsoliton_field(spec, t, grid):
    return Field(grid, kdv_nsoliton_values(spec, t, grid.x))


@lru_cache(maxsize=64)
def _subsets(speeds):
    sc = np.sqrt(np.array(speeds))
    r = np.sqrt(sc)
    b = 2.0 * np.outer(r, r) / (sc[:, None] + sc[None, :])
    n = len(speeds)
    masks, logdet, lam = [], [], []
    for size in range(n + 1):
        for idx in combinations(range(n), size):
            mask = np.zeros(n, dtype=bool)
            mask[list(idx)] = True
            if size:
                sign, ld = np.linalg.slogdet(b[np.ix_(idx, idx)])
                if sign <= 0:
                    raise PrecisionLossError("principal minor of B is not positive")
            else:
                ld = 0.0
            masks.append(mask)
            logdet.append(ld)
            lam.append(sc[mask].sum())
    return np.array(masks), np.array(logdet), np.array(lam)


def _cumulants_from_central(mom, order):
    # mom[k] = E[(X - mean)^k]; cumulants are shift invariant beyond order 1
    kap = [0.0] * (order + 1)
    for n in range(2, order + 1):
        acc = mom[n]
        for k in range(2, n - 1):
            acc = acc - math.comb(n - 1, k - 1) * kap[k] * mom[n - k]
        kap[n] = acc
    return kap


def kdv_nsoliton_derivatives(spec, t, x, s_max):
    """``d^s u / dx^s`` for ``s = 0..s_max`` via the cumulant route.

    Returns an array of shape ``(s_max + 1,) + x.shape``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    masks, logdet, lam = _subsets(spec.speeds)
    th = spec.theta(t, x)
    logw = logdet + 2.0 * th @ masks.T.astype(float)
    w = np.exp(logw - logsumexp(logw, axis=-1, keepdims=True))
    mean = w @ lam
    dev = lam - mean[..., None]
    order = s_max + 2
    mom = [np.ones_like(mean), np.zeros_like(mean)]
    p = dev.copy()
    for _ in range(2, order + 1):
        p = p * dev
        mom.append(np.sum(w * p, axis=-1))
    kap = _cumulants_from_central(mom, order)
    return np.array([6.0 * kap[s + 2] for s in range(s_max + 1)])


def asymptotic_soliton_params(spec, direction=+1):
    """Speeds and translations of the solitons ``u`` resolves into.

    As ``t -> +inf`` soliton ``j`` sits to the right of all slower ones,
    whose phases are then large; factoring them out of ``det M`` leaves
    the ratio of leading principal minors ``det B[1..j] / det B[1..j-1]``
    as an extra phase. For ``t -> -inf`` the trailing minors play this
    role. Returns a list of ``(c_j, x0_j)`` pairs.
    """
    b = spec.b
    n = spec.n

    def minor(lo, hi):
        if hi <= lo:
            return 0.0
        return np.linalg.slogdet(b[lo:hi, lo:hi])[1]

    out = []
    for j in range(n):
        if direction > 0:
            shift = minor(0, j + 1) - minor(0, j)
        else:
            shift = minor(j, n) - minor(j + 1, n)
        c = spec.speeds[j]
        out.append((c, -(spec.shifts[j] + shift) / math.sqrt(c)))
    return out


class HighPrecisionResidual:
    """Arbitrary-precision ``d^s z`` with ``z = u - sum_j R_j``.

    The solitons ``R_j`` use the outgoing parameters from
    :func:`asymptotic_soliton_params`. Both ``u`` and each ``R_j`` are
    evaluated by the cumulant route in mpmath, so the cancellation in
    ``z`` costs digits rather than accuracy. Working precision adapts
    per point until two precisions agree.
    """

    def __init__(self, spec, direction=+1, rtol=1e-12, dps=40, max_dps=2000):
        self.spec = spec
        self.direction = direction
        self.solitons = asymptotic_soliton_params(spec, direction)
        self.rtol = rtol
        self.dps = dps
        self.max_dps = max_dps
        self._cache = {}

    def _tables(self, dps):
        if dps not in self._cache:
            with mpmath.workdps(dps):
                sc = [mpmath.sqrt(mpmath.mpf(c)) for c in self.spec.speeds]
                r = [mpmath.sqrt(v) for v in sc]
                n = len(sc)
                rows = []
                for size in range(n + 1):
                    for idx in combinations(range(n), size):
                        if size:
                            mat = mpmath.matrix(size, size)
                            for a, i in enumerate(idx):
                                for bb, j in enumerate(idx):
                                    mat[a, bb] = 2 * r[i] * r[j] / (sc[i] + sc[j])
                            ld = mpmath.log(mpmath.det(mat))
                        else:
                            ld = mpmath.mpf(0)
                        rows.append((idx, ld, sum((sc[i] for i in idx), mpmath.mpf(0))))
                sol = self._outgoing(sc, r)
                self._cache[dps] = (sc, rows, sol)
        return self._cache[dps]

    def _outgoing(self, sc, r):
        # minor ratios redone at working precision: a float64 shift would
        # leave an O(1e-16) error in z next to every crest
        n = len(sc)

        def logminor(lo, hi):
            if hi <= lo:
                return mpmath.mpf(0)
            mat = mpmath.matrix(hi - lo, hi - lo)
            for a in range(lo, hi):
                for b in range(lo, hi):
                    mat[a - lo, b - lo] = 2 * r[a] * r[b] / (sc[a] + sc[b])
            return mpmath.log(mpmath.det(mat))

        out = []
        for j in range(n):
            if self.direction > 0:
                shift = logminor(0, j + 1) - logminor(0, j)
            else:
                shift = logminor(j, n) - logminor(j + 1, n)
            x0 = -(mpmath.mpf(self.spec.shifts[j]) + shift) / sc[j]
            out.append((sc[j], mpmath.mpf(self.spec.speeds[j]), x0))
        return out

    @staticmethod
    def _cumulants(logw, lam, order):
        top = max(logw)
        w = [mpmath.exp(v - top) for v in logw]
        tot = mpmath.fsum(w)
        mean = mpmath.fsum(wi * li for wi, li in zip(w, lam)) / tot
        dev = [li - mean for li in lam]
        mom = [mpmath.mpf(1), mpmath.mpf(0)]
        for k in range(2, order + 1):
            mom.append(mpmath.fsum(wi * d ** k for wi, d in zip(w, dev)) / tot)
        return _cumulants_from_central(mom, order)

    def _eval(self, t, x, s_max, dps):
        sc, rows, sol = self._tables(dps)
        order = s_max + 2
        with mpmath.workdps(dps):
            t = mpmath.mpf(t)
            x = mpmath.mpf(x)
            th = [(sc[i] * (x - mpmath.mpf(c) * t) + mpmath.mpf(xi)) / 2
                  for i, (c, xi) in enumerate(zip(self.spec.speeds, self.spec.shifts))]
            logw = [ld + 2 * mpmath.fsum(th[i] for i in idx) for idx, ld, _ in rows]
            kap = self._cumulants(logw, [lam for _, _, lam in rows], order)
            z = [6 * kap[s + 2] for s in range(s_max + 1)]
            for rc, c, x0 in sol:
                arg = rc * (x - c * t - x0)
                kj = self._cumulants([mpmath.mpf(0), arg], [mpmath.mpf(0), rc], order)
                for s in range(s_max + 1):
                    z[s] -= 6 * kj[s + 2]
            return z

    def point(self, t, x, s_max=0):
        dps = self.dps
        while True:
            lo = self._eval(t, x, s_max, dps)
            hi = self._eval(t, x, s_max, dps + 30)
            ok = all(abs(a - b) <= self.rtol * abs(b) for a, b in zip(lo, hi))
            if ok:
                self.dps = max(self.dps, dps)
                return np.array([float(v) for v in hi])
            dps *= 2
            if dps > self.max_dps:
                raise PrecisionLossError(
                    f"residual at (t={t}, x={x}) not stable up to {self.max_dps} digits")

    def values(self, t, x, s_max=0):
        """Array of shape ``(s_max + 1, len(x))``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([self.point(t, xi, s_max) for xi in x]).T


__all__ = [
    "KdvNSolitonSpec", "TauMatrix", "tau_matrix", "kdv_nsoliton",
    "kdv_nsoliton_values", "kdv_nsoliton_field", "kdv_nsoliton_derivatives",
    "asymptotic_soliton_params", "HighPrecisionResidual",
]

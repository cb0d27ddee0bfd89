"""Arctan-of-exponential weights, their certificates and primitives.

Left weight (localised mass to the left of the solitons)::

    phi(x) = 1/2 - arctan(exp(kappa x)) / pi

Right weight (localised energy to the right)::

    phi(x) = (2 / pi) arctan(exp(sqrt(eta) x))

together with its iterated primitives ``phi_[n]`` from ``-inf`` and the
superpolynomial series weight ``sum_n x^n / 2^(mu^(s+n))``.
"""

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import InvalidParameterError, QuadratureToleranceError

LADDER_RTOL = 1e-10
ROUNDOFF = 1e-14
TAIL_SPAN = 40.0


@dataclass(frozen=True)
class LeftArctan:
    kappa: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParameterError(f"kappa must be positive, got {self.kappa}")

    @property
    def rate(self):
        return self.kappa


@dataclass(frozen=True)
class RightArctan:
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidParameterError(f"eta must be positive, got {self.eta}")

    @property
    def rate(self):
        return math.sqrt(self.eta)


@dataclass(frozen=True)
class Ladder:
    """Tables of ``phi_[0..n_max]`` on a uniform grid starting at ``x_cut``."""

    x: np.ndarray
    tables: tuple
    h: float
    refinement_error: tuple

    @property
    def n_max(self):
        return len(self.tables) - 1

    @property
    def x_cut(self):
        return float(self.x[0])

    @property
    def x_hi(self):
        return float(self.x[-1])


@dataclass(frozen=True)
class WeightFamily:
    kind: object
    ladder: Ladder = None
    _interp: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def x_cut(self):
        return -TAIL_SPAN / self.kind.rate

    def __call__(self, x, order=0):
        return weight_eval(self, x, order)


def _sech_tanh(y):
    ay = np.abs(y)
    e = np.exp(-2.0 * ay)
    sech = 2.0 * np.exp(-ay) / (1.0 + e)
    return sech, np.tanh(y)


def weight_eval(w, x, order=0):
    """Closed-form ``phi^(order)(x)`` for ``order`` in ``0..3``."""
    kind = w.kind if isinstance(w, WeightFamily) else w
    if order not in (0, 1, 2, 3):
        raise InvalidParameterError(f"order must be 0..3, got {order}")
    x = np.asarray(x, dtype=float)
    r = kind.rate
    y = r * x
    if order == 0:
        # arctan(e^-y) form keeps full relative accuracy where phi is small
        if isinstance(kind, LeftArctan):
            return np.arctan(np.exp(-y)) / np.pi
        return (2.0 / np.pi) * np.where(y <= 0, np.arctan(np.exp(np.minimum(y, 0.0))),
                                        np.pi / 2 - np.arctan(np.exp(-np.maximum(y, 0.0))))
    sech, tanh = _sech_tanh(y)
    if order == 1:
        base = sech
    elif order == 2:
        base = -r * sech * tanh
    else:
        base = r ** 2 * sech * (tanh ** 2 - sech ** 2)
    if isinstance(kind, LeftArctan):
        return -(r / (2.0 * np.pi)) * base
    return (r / np.pi) * base


@dataclass(frozen=True)
class PropertyCheck:
    property: str
    constant_name: str
    constant_value: float
    worst_x: float
    margin: float
    passed: bool


@dataclass(frozen=True)
class WeightCertificate:
    kind: object
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def constants(self):
        return {c.constant_name: c.constant_value for c in self.checks if c.constant_name}

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def extend(self, checks):
        return replace(self, checks=self.checks + tuple(checks))

    def to_csv(self, fh=None):
        """Write ``property,constant_name,constant_value,worst_x,margin,pass``."""
        own = fh is None
        fh = io.StringIO() if own else fh
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["property", "constant_name", "constant_value", "worst_x", "margin", "pass"])
        for c in self.checks:
            wr.writerow([c.property, c.constant_name, f"{c.constant_value:.17g}",
                         f"{c.worst_x:.17g}", f"{c.margin:.17g}", str(c.passed).lower()])
        return fh.getvalue() if own else None


def _check(prop, name, value, slack, x):
    # slack >= 0 means the inequality holds at that point
    i = int(np.argmin(slack))
    return PropertyCheck(prop, name, float(value), float(x[i]), float(slack[i]),
                         bool(slack[i] >= 0))


def certify_left_weight(kappa, n_points=240_001):
    """Grid certificate for the left weight on ``[-60/kappa, 60/kappa]``.

    Checks ``lam0 e^{-kappa|x|} < -phi' < e^{-kappa|x|} / lam0``,
    ``|phi'''| <= kappa^2 (-phi')`` and ``lam1 e^{-kappa x} <= phi`` on
    ``x >= 0``, reporting the tightest constants the grid allows.
    """
    kind = LeftArctan(float(kappa))
    x = np.linspace(-60.0 / kappa, 60.0 / kappa, n_points)
    d1 = -weight_eval(kind, x, 1)
    d3 = weight_eval(kind, x, 3)
    env = np.exp(-kappa * np.abs(x))
    ratio = d1 / env
    # strict two-sided bound: shade the tightest constant by one ulp-scale step
    lam0 = min(ratio.min(), 1.0 / ratio.max()) * (1.0 - 1e-12)
    checks = [
        _check("derivative lower", "lambda0", lam0, ratio - lam0, x),
        _check("derivative upper", "lambda0", lam0, 1.0 / lam0 - ratio, x),
    ]
    bound = kappa ** 2 * d1
    checks.append(_check("third derivative", "kappa^2", kappa ** 2,
                         bound * (1 + ROUNDOFF) - np.abs(d3), x))
    xr = x[x >= 0]
    lower = weight_eval(kind, xr, 0) * np.exp(kappa * xr)
    lam1 = lower.min()
    checks.append(_check("right tail lower", "lambda1", lam1, lower - lam1, xr))
    return WeightCertificate(kind, tuple(checks))


def certify_right_weight(eta, n_points=240_001):
    """Grid certificate of the right-weight bounds.

    ``phi -> 0`` at ``-inf``, ``0 <= phi' <= kappa1 e^{sqrt(eta) x}``,
    ``|phi'''| <= kappa2 phi'`` and the integrated form
    ``phi <= (kappa1 / sqrt(eta)) e^{sqrt(eta) x}``. ``kappa1`` is the
    grid supremum of ``phi' e^{-sqrt(eta) x}`` (it tends to
    ``2 sqrt(eta) / pi`` at ``-inf``) and ``kappa2 = eta``.
    """
    kind = RightArctan(float(eta))
    r = kind.rate
    x = np.linspace(-60.0 / r, 60.0 / r, n_points)
    phi = weight_eval(kind, x, 0)
    d1 = weight_eval(kind, x, 1)
    d3 = weight_eval(kind, x, 3)
    growth = np.exp(r * x)
    kappa1 = float(np.max(d1 / growth))
    checks = [
        PropertyCheck("vanishes at -inf", "phi(x_min)", float(phi[0]), float(x[0]),
                      float(1e-12 - phi[0]), bool(phi[0] <= 1e-12 and phi.min() >= 0)),
        _check("derivative nonnegative", "", 0.0, d1, x),
        _check("derivative upper", "kappa1", kappa1,
               kappa1 * growth * (1 + ROUNDOFF) - d1, x),
        _check("third derivative", "kappa2", eta, eta * d1 * (1 + ROUNDOFF) - np.abs(d3), x),
        _check("integrated upper", "kappa1/sqrt(eta)", kappa1 / r,
               kappa1 / r * growth - phi, x),
    ]
    return WeightCertificate(kind, tuple(checks))


def cumulative_quad4(f, h):
    """Cumulative integral of uniform samples, fourth order at every node.

    Interior cells use ``h/24 (-f[i-1] + 13 f[i] + 13 f[i+1] - f[i+2])``, the
    two end cells the one-sided four-point rules. Unlike composite
    Simpson, odd nodes get the same order as even ones, so the
    Richardson factor 16 applies throughout.
    """
    f = np.asarray(f, dtype=float)
    if f.size < 4:
        raise InvalidParameterError("need at least four samples")
    cell = np.empty(f.size - 1)
    cell[1:-1] = -f[:-3] + 13.0 * f[1:-2] + 13.0 * f[2:-1] - f[3:]
    cell[0] = 9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
    cell[-1] = f[-4] - 5.0 * f[-3] + 19.0 * f[-2] + 9.0 * f[-1]
    out = np.empty_like(f)
    out[0] = 0.0
    out[1:] = np.cumsum(cell * (h / 24.0))
    return out


def _ladder_tables(r, n_max, x_cut, x_hi, h):
    n_pts = int(round((x_hi - x_cut) / h)) + 1
    x = x_cut + h * np.arange(n_pts)
    kind = RightArctan(r * r)
    tables = [weight_eval(kind, x, 0)]
    for n in range(1, n_max + 1):
        seed = (2.0 / np.pi) * r ** (-n) * math.exp(r * x_cut)
        tables.append(seed + cumulative_quad4(tables[-1], h))
    return x, tables


def build_ladder(w, n_max, h=None, x_hi=None):
    """Tabulate ``phi_[n]`` for ``n = 0..n_max``.

    Quadrature is a fourth-order cumulative rule from ``x_cut = -40/sqrt(eta)``; the
    tail below ``x_cut`` is the leading asymptotic term
    ``(2/pi) eta^{-n/2} e^{sqrt(eta) x}``. The ladder is rebuilt at half
    the step and the tables must agree to ``1e-10`` relative; the stored
    values are the Richardson combination of the two.
    """
    if not isinstance(w, WeightFamily):
        w = WeightFamily(w)
    if not isinstance(w.kind, RightArctan):
        raise InvalidParameterError("the ladder is defined for the right weight only")
    if n_max < 1:
        raise InvalidParameterError("n_max must be at least 1")
    r = w.kind.rate
    # the cell error of the rule on e^{r x} is ~ (r h)^4 relative and
    # stacks once per level, so keep r h small enough for n_max ~ 10
    h = min(0.005, 0.0035 / r) if h is None else float(h)
    x_cut = w.x_cut
    x_hi = max(60.0, TAIL_SPAN / r) if x_hi is None else max(float(x_hi), TAIL_SPAN / r)
    n_steps = int(math.ceil((x_hi - x_cut) / h))
    x_hi = x_cut + n_steps * h
    x, coarse = _ladder_tables(r, n_max, x_cut, x_hi, h)
    _, fine = _ladder_tables(r, n_max, x_cut, x_hi, h / 2)
    tables, errs = [], []
    for n, (c, f) in enumerate(zip(coarse, fine)):
        f = f[::2]
        err = float(np.max(np.abs(f - c) / np.abs(f)))
        if err > LADDER_RTOL:
            raise QuadratureToleranceError(
                f"phi_[{n}]: refinement changed the table by {err:.3e} (limit {LADDER_RTOL:.0e})")
        tables.append(f if n == 0 else (16.0 * f - c) / 15.0)
        errs.append(err)
    ladder = Ladder(x, tuple(tables), h, tuple(errs))
    return WeightFamily(w.kind, ladder)


def ladder_eval(w, n, x):
    """``phi_[n](x)`` from the tables, the tail formula, or the flat-top Taylor
    extension beyond the table (where ``phi = 1`` to double precision)."""
    lad = w.ladder
    if lad is None or n > lad.n_max:
        raise InvalidParameterError(f"ladder of order {n} has not been built")
    x = np.asarray(x, dtype=float)
    r = w.kind.rate
    if n == 0:
        return weight_eval(w, x, 0)
    if n not in w._interp:
        # slopes are known exactly (phi_[n]' = phi_[n-1] >= 0), which keeps the
        # cubic monotone and fourth-order accurate between nodes
        w._interp[n] = CubicHermiteSpline(lad.x, lad.tables[n], lad.tables[n - 1],
                                          extrapolate=False)
    out = np.empty_like(x)
    left = x < lad.x_cut
    right = x > lad.x_hi
    mid = ~(left | right)
    out[left] = (2.0 / np.pi) * r ** (-n) * np.exp(r * x[left])
    out[mid] = w._interp[n](x[mid])
    if np.any(right):
        d = x[right] - lad.x_hi
        acc = np.full_like(d, d ** 0 * 0.0)
        for k in range(n):
            acc += lad.tables[n - k][-1] * d ** k / math.factorial(k)
        out[right] = acc + d ** n / math.factorial(n)
    return out


def certify_ladder(w, n_max=None, x_lo=-20.0, x_hi=50.0, rtol=LADDER_RTOL):
    """Check the polynomial-growth bounds of ``phi_[n]`` on the table nodes.

    For ``x <= 0``: ``phi_[n] <= eta^{-n/2} e^{sqrt(eta) x}``. For
    ``x >= 0``: ``x^n / (2 n!) <= phi_[n] <= sum_k eta^{-(n-k)/2} x^k / k!``.
    """
    lad = w.ladder
    n_max = lad.n_max if n_max is None else n_max
    r = w.kind.rate
    sel = (lad.x >= x_lo - 1e-12) & (lad.x <= x_hi + 1e-12)
    x = lad.x[sel]
    neg, pos = x <= 0, x >= 0
    checks = []
    for n in range(n_max + 1):
        v = lad.tables[n][sel]
        checks.append(PropertyCheck(f"ladder quadrature n={n}", "refinement_rel", lad.refinement_error[n],
                                    float("nan"), rtol - lad.refinement_error[n],
                                    lad.refinement_error[n] <= rtol))
        up_left = r ** (-n) * np.exp(r * x[neg])
        checks.append(_check(f"ladder upper x<=0 n={n}", "", 0.0,
                             up_left * (1 + rtol) - v[neg], x[neg]))
        xp = x[pos]
        low = 0.5 * xp ** n / math.factorial(n)
        checks.append(_check(f"ladder lower x>=0 n={n}", "", 0.0,
                             v[pos] * (1 + rtol) - low, xp))
        up = sum(r ** (-(n - k)) * xp ** k / math.factorial(k) for k in range(n + 1))
        checks.append(_check(f"ladder upper x>=0 n={n}", "", 0.0,
                             up * (1 + rtol) - v[pos], xp))
        checks.append(_check(f"ladder nonnegative n={n}", "", 0.0, v, x))
    return checks


def superpolynomial_weight(mu, s, x, tol=1e-16, max_terms=10_000, return_bound=False):
    """``sum_{n>=0} x^n / 2^(mu^(s+n))`` summed until the remainder is below tol.

    The ratio of consecutive terms, ``x / 2^(mu^(s+n) (mu - 1))``, is
    decreasing in ``n``, so once it drops below one the tail after term
    ``N`` is bounded by ``t_{N+1} / (1 - q)``.
    """
    if not mu > 1:
        raise InvalidParameterError(f"mu must exceed 1, got {mu}")
    if x < 0:
        raise InvalidParameterError("x must be nonnegative")
    if s < 0:
        raise InvalidParameterError("s must be nonnegative")
    ln2 = math.log(2.0)
    if x == 0:
        val = math.exp(-(mu ** s) * ln2)
        return (val, 0.0) if return_bound else val
    lx = math.log(x)

    def log_term(n):
        try:
            return n * lx - mu ** (s + n) * ln2
        except OverflowError:
            return -math.inf

    logs = []
    n = 0
    while True:
        logs.append(log_term(n))
        top = max(logs)
        nxt, nxt2 = log_term(n + 1), log_term(n + 2)
        q = math.exp(nxt2 - nxt) if nxt > -math.inf else 0.0
        if q < 1.0:
            total = math.fsum(math.exp(v - top) for v in logs)
            bound = math.exp(nxt - top) / (1.0 - q) if nxt > -math.inf else 0.0
            if bound <= tol * total:
                scale = math.exp(top)
                return (scale * total, scale * bound) if return_bound else scale * total
        n += 1
        if n >= max_terms:
            raise InvalidParameterError(
                f"series terms still growing after {max_terms} terms (x={x}, mu={mu}, s={s})")


__all__ = [
    "LeftArctan", "RightArctan", "WeightFamily", "Ladder", "weight_eval",
    "PropertyCheck", "WeightCertificate", "certify_left_weight",
    "certify_right_weight", "build_ladder", "ladder_eval", "certify_ladder",
    "superpolynomial_weight",
]

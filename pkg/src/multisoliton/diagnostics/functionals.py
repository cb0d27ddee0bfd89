"""Weighted functionals of a run and of its residual ``z = u - sum_j R_j``.

Every quantity is a quadrature of samples. Samples come either from a
snapshot grid (spectral derivatives) or, for exact KdV runs, from the
closed-form cumulant route: ``u`` and its derivatives in double precision
and ``z`` in arbitrary precision, because ``z`` is many orders of
magnitude below ``u`` and cannot be formed by subtraction in floats.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import (DegenerateFitError, InvalidParameterError,
                      SnapshotNotFoundError, SolitonLabError)
from ..grid import Field
from ..integrable import (HighPrecisionResidual, KdvNSolitonSpec,
                          asymptotic_soliton_params, kdv_nsoliton_derivatives)
from ..profiles import (NOISE_REL, NlsSolitonParams, SolitonParams, _profile,
                        nls_soliton_field, profile_derivative, profile_polynomials)
from ..spectral import check_resolved, derivative_values, noise_cutoff
from ..weights import LeftArctan, ladder_eval, weight_eval

QUAD_FLOOR = 1e-28
HP_FLOOR = 1e-300
GL_ORDER = 20


# ----------------------------------------------------------------- samples

@dataclass(frozen=True)
class Samples:
    """Derivatives ``d^s f`` (rows) at nodes ``x`` with quadrature weights."""

    t: float
    x: np.ndarray
    derivs: np.ndarray
    weights: np.ndarray

    @property
    def s_max(self):
        return self.derivs.shape[0] - 1

    def integrate(self, values):
        return float(np.sum(self.weights * values))


def _trap_weights(x):
    w = np.full(x.size, x[1] - x[0])
    return w


def _gl_rule(breaks, order=GL_ORDER):
    g, gw = np.polynomial.legendre.leggauss(order)
    a = np.asarray(breaks[:-1])[:, None]
    b = np.asarray(breaks[1:])[:, None]
    nodes = (0.5 * (b - a) * g + 0.5 * (b + a)).ravel()
    weights = (0.5 * (b - a) * gw).ravel()
    return nodes, weights


def field_samples(f, s_max, t, guard=True, noise_rel=NOISE_REL):
    """Spectral derivatives ``0..s_max`` of a snapshot on its periodic grid."""
    grid = f.grid
    f_hat = np.fft.fft(f.values)
    if s_max > 0:
        f_hat = noise_cutoff(f_hat, grid.k, noise_rel)
        if guard:
            check_resolved((1j * grid.k) ** s_max * f_hat, grid.k,
                           what=f"derivative of order {s_max}")
    rows = [np.asarray(f.values)]
    for s in range(1, s_max + 1):
        rows.append(derivative_values(f.values, grid, s, f_hat=f_hat))
    return Samples(float(t), grid.x, np.array(rows), _trap_weights(grid.x))


def _solitons_of(spec):
    if isinstance(spec, KdvNSolitonSpec):
        return [SolitonParams(2, c, x0) for c, x0 in asymptotic_soliton_params(spec, +1)]
    if isinstance(spec, (SolitonParams, NlsSolitonParams)):
        return [spec]
    out = list(spec)
    if not out:
        raise InvalidParameterError("empty soliton list")
    return out


def soliton_sum(spec, t, x, s=0):
    """``sum_j d^s R_j(t, x)`` from closed forms (real gKdV or complex NLS)."""
    x = np.asarray(x, dtype=float)
    sols = _solitons_of(spec)
    out = np.zeros(x.shape, dtype=complex if isinstance(sols[0], NlsSolitonParams) else float)
    for sp in sols:
        if isinstance(sp, NlsSolitonParams):
            y = x - sp.center(t)
            phase = np.exp(1j * (0.5 * sp.v * x + (sp.omega - 0.25 * sp.v ** 2) * t + sp.gamma))
            acc = np.zeros(x.shape, dtype=complex)
            for k in range(s + 1):
                acc += math.comb(s, k) * profile_derivative(sp.p, sp.omega, y, k) \
                    * (0.5j * sp.v) ** (s - k)
            out += acc * phase
        else:
            out += profile_derivative(sp.p, sp.c, x - sp.center(t), s)
    return out


def residual(u, spec, t):
    """``z = u - sum_j R_j(t)`` with the solitons sampled analytically.

    ``spec`` is a soliton parameter object, a list of them, or a KdV
    N-soliton spec (resolved into its outgoing solitons).
    """
    if not isinstance(u, Field):
        raise InvalidParameterError("residual needs a Field")
    sols = _solitons_of(spec)
    if isinstance(sols[0], NlsSolitonParams):
        r = sum(nls_soliton_field(sp, t, u.grid).values for sp in sols)
        if not u.is_complex:
            raise InvalidParameterError("NLS residual needs a complex field")
    else:
        r = sum(_profile(sp.p, sp.c, u.x - sp.center(t)) for sp in sols)
    return Field(u.grid, u.values - r, {"t": float(t)})


class ResidualSampler:
    """Cached residual samples for one run.

    For an exact KdV run ``z`` is evaluated by :class:`HighPrecisionResidual`
    on a uniform window ``[c_1 t - pad, hi_speed t + pad]`` (``dx``), or on
    Gauss-Legendre panels for half-line integrals. Otherwise ``z`` comes
    from the snapshot grid.
    """

    def __init__(self, run, spec, s_max, dx=0.25, pad=40.0, hi_speed=None):
        self.run = run
        self.spec = spec
        self.s_max = int(s_max)
        self.dx = float(dx)
        self.pad = float(pad)
        self.exact = run.exact_spec is not None and isinstance(spec, KdvNSolitonSpec)
        self.hi_speed = (max(spec.speeds) + 1.0 if isinstance(spec, KdvNSolitonSpec) else None) \
            if hi_speed is None else float(hi_speed)
        self._hp = HighPrecisionResidual(spec) if self.exact else None
        self._whole = {}
        self._half = {}

    @property
    def floor(self):
        return HP_FLOOR if self.exact else QUAD_FLOOR

    def soliton_sum(self, t, x):
        return soliton_sum(self.spec, t, x)

    def whole(self, t):
        t = float(t)
        if t not in self._whole:
            if self.exact:
                lo = min(self.spec.speeds) * t - self.pad
                hi = self.hi_speed * t + self.pad
                n = int(math.ceil((hi - lo) / self.dx)) + 1
                x = lo + self.dx * np.arange(n)
                z = self._hp.values(t, x, self.s_max)
                self._whole[t] = Samples(t, x, z, _trap_weights(x))
            else:
                z = residual(self.run.snapshot(t), self.spec, t)
                self._whole[t] = field_samples(z, self.s_max, t)
        return self._whole[t]

    def half(self, t, beta, width=None):
        """Samples on ``x >= beta t`` for moment integrals."""
        key = (float(t), float(beta))
        if key not in self._half:
            x_cut = beta * t
            if self.exact:
                width = self.pad if width is None else width
                breaks = np.arange(0.0, width + 1e-12, 1.0) + x_cut
                x, w = _gl_rule(breaks)
                z = self._hp.values(t, x, self.s_max)
                self._half[key] = Samples(float(t), x, z, w)
            else:
                full = self.whole(t)
                keep = full.x >= x_cut
                w = full.weights[keep].copy()
                if keep.any():
                    w[0] *= 0.5
                self._half[key] = Samples(float(t), full.x[keep], full.derivs[:, keep], w)
        return self._half[key]


def solution_samples(run, t, s_max, x=None):
    """``d^s u`` at time ``t``: closed form for exact runs, spectral otherwise."""
    if run.exact_spec is not None:
        x = run.grid.x if x is None else np.asarray(x, dtype=float)
        d = kdv_nsoliton_derivatives(run.exact_spec, t, x, s_max)
        return Samples(float(t), x, d, _trap_weights(x))
    return field_samples(run.snapshot(t), s_max, t)


# ------------------------------------------------------------------ series

@dataclass(frozen=True)
class ExponentialFit:
    """``value ~ C exp(-rate t)`` by least squares on ``log value``."""

    C: float
    rate: float
    r2: float
    t_min: float
    t_max: float
    n_used: int
    excluded: tuple = ()

    def envelope(self, t):
        return self.C * np.exp(-self.rate * np.asarray(t, dtype=float))


def fit_exponential(t, values, floor=QUAD_FLOOR, min_points=3):
    t = np.asarray(t, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    ok = v > floor
    if ok.sum() < min_points:
        raise DegenerateFitError(
            f"only {int(ok.sum())} values above the floor {floor:.0e}; need {min_points}")
    tt, lv = t[ok], np.log(v[ok])
    slope, icpt = np.polyfit(tt, lv, 1)
    pred = icpt + slope * tt
    ss_res = float(np.sum((lv - pred) ** 2))
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ExponentialFit(float(math.exp(icpt)), float(-slope), r2, float(tt[0]),
                          float(tt[-1]), int(ok.sum()), tuple(float(x) for x in t[~ok]))


@dataclass
class FunctionalSeries:
    """Time series of one functional at fixed parameters."""

    functional: str
    params: dict
    t: np.ndarray
    values: np.ndarray
    floor: float = QUAD_FLOOR
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.t.shape != self.values.shape:
            raise InvalidParameterError("times and values differ in length")
        if np.any(np.diff(self.t) <= 0):
            raise InvalidParameterError("series times must be increasing")
        if not np.all(np.isfinite(self.values)):
            raise InvalidParameterError(f"{self.functional}: non-finite values")

    def window(self, t_min=None, t_max=None):
        m = np.ones(self.t.size, bool)
        if t_min is not None:
            m &= self.t >= t_min - 1e-12
        if t_max is not None:
            m &= self.t <= t_max + 1e-12
        return self.t[m], self.values[m]

    def fit(self, t_min=None, t_max=None, floor=None):
        t, v = self.window(t_min, t_max)
        return fit_exponential(t, v, self.floor if floor is None else floor)

    def smallest_constant(self, rate, t_min=None, t_max=None):
        """Least ``K`` with ``|value(t)| <= K exp(-rate t)`` on the window."""
        t, v = self.window(t_min, t_max)
        return float(np.max(np.abs(v) * np.exp(rate * t)))

    def rows(self):
        p = self.params
        for t, v in zip(self.t, self.values):
            yield (self.functional, p.get("s", ""), p.get("x0", ""), p.get("n", ""), t, v)


# ------------------------------------------------------------- I functional

def _shifted(x, t, t0, x0, params):
    return x - x0 + params.delta * (t - t0) - params.alpha * t


def i_functional(run, t, t0, x0, params):
    """``I(t) = int u^2(t, x) phi(x - x0 + delta (t - t0) - alpha t) dx``.

    ``phi`` is the left arctan weight of rate ``params.kappa``.
    """
    u = run.snapshot(t).values
    x = run.grid.x
    w = LeftArctan(params.kappa)
    phi = weight_eval(w, _shifted(x, t, t0, x0, params), 0)
    val = float(np.sum(np.abs(u) ** 2 * phi) * run.grid.dx)
    mass = float(np.sum(np.abs(u) ** 2) * run.grid.dx)
    if val > mass * (1 + 1e-12):
        raise SolitonLabError(f"I = {val} exceeds the mass {mass} although phi <= 1")
    return val


def i_functional_rate(run, t, t0, x0, params, p=2):
    """``dI/dt`` from the flux identity

    ``-3 int u_x^2 phi' - (alpha - delta) int u^2 phi' + int u^2 phi'''
    + 2p/(p+1) int u^(p+1) phi'``.
    """
    smp = solution_samples(run, t, 1)
    u, ux = smp.derivs[0], smp.derivs[1]
    y = _shifted(smp.x, t, t0, x0, params)
    w = LeftArctan(params.kappa)
    d1 = weight_eval(w, y, 1)
    d3 = weight_eval(w, y, 3)
    a, d = params.alpha, params.delta
    val = (-3 * ux ** 2 * d1 - (a - d) * u ** 2 * d1 + u ** 2 * d3
           + 2 * p / (p + 1) * u ** (p + 1) * d1)
    return smp.integrate(val)


@dataclass
class MonotonicityReport:
    """Worst case of the almost-monotonicity of ``I`` over a sweep of ``x0``.

    ``values[i, k] = I_(t0, x0_i)(times[k])``. ``C1`` is the least constant
    with ``I(t0) <= I(t) + C1 exp(kappa x0)`` for every pair, ``C1_level``
    the least with ``I(t0) <= C1 exp(kappa x0)``, and ``C0`` the least with
    ``dI/dt >= -C0 exp(-kappa (-x0 + delta (t - t0)))``.
    """

    t0: float
    x0: np.ndarray
    times: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    C1: float
    C1_level: float
    C0: float
    margins: np.ndarray
    fd_mismatch: float
    decay_ratio: np.ndarray

    @property
    def violations(self):
        return int(np.count_nonzero(self.margins > 0))


def monotonicity_check(run, t0, x0_list, params, p=2):
    x0 = np.asarray(x0_list, dtype=float)
    times = np.array([t for t in run.times if t >= t0 - 1e-12])
    if times.size == 0 or abs(times[0] - t0) > 1e-9:
        raise SnapshotNotFoundError(f"no snapshot at t0 = {t0}")
    vals = np.array([[i_functional(run, t, t0, a, params) for t in times] for a in x0])
    slopes = np.array([[i_functional_rate(run, t, t0, a, params, p) for t in times] for a in x0])
    k = params.kappa
    drop = vals[:, :1] - vals
    scale = np.exp(k * x0)[:, None]
    c1 = float(max(0.0, np.max(drop / scale)))
    margins = np.maximum(0.0, drop - c1 * scale)
    margins[margins <= 1e-15 * np.abs(vals).max()] = 0.0
    c1_level = float(np.max(vals[:, 0] / scale[:, 0]))
    decay = np.exp(-k * (-x0[:, None] + params.delta * (times[None, :] - t0)))
    c0 = float(max(0.0, np.max(-slopes / decay)))
    fd = 0.0
    if times.size >= 3:
        num = np.gradient(vals, times, axis=1, edge_order=2)
        fd = float(np.max(np.abs(num - slopes)))
    ratio = vals[:, -1] / np.where(vals[:, 0] > 0, vals[:, 0], 1.0)
    return MonotonicityReport(float(t0), x0, times, vals, slopes, c1, c1_level, c0,
                              margins, fd, ratio)


# ------------------------------------------------------------- J functional

def _as_samples(z, s, t):
    if isinstance(z, Samples):
        if z.s_max < s:
            raise InvalidParameterError(f"samples hold derivatives up to {z.s_max}, need {s}")
        return z
    if isinstance(z, Field):
        tt = z.meta.get("t") if t is None else t
        if tt is None:
            raise InvalidParameterError("time t is required for a bare Field")
        return field_samples(z, s, tt, guard=s > 0)
    raise InvalidParameterError("z must be a Field or Samples")


def j_functional(z, s, x0, beta, w, n=0, t=None, radial=False):
    """``J(t) = int |d^s z|^2 phi_[n](x - x0 - beta t) dx``.

    ``radial`` replaces ``x`` by ``|x|`` in the weight (the 1-D NLS form).
    ``n = 0`` uses the weight itself, for which ``J <= ||d^s z||^2`` is
    checked on every call.
    """
    if s < 0 or n < 0:
        raise InvalidParameterError("s and n must be nonnegative")
    smp = _as_samples(z, s, t)
    xs = np.abs(smp.x) if radial else smp.x
    arg = xs - x0 - beta * smp.t
    phi = weight_eval(w, arg, 0) if n == 0 else ladder_eval(w, n, arg)
    dens = np.abs(smp.derivs[s]) ** 2
    val = smp.integrate(dens * phi)
    if n == 0:
        bound = smp.integrate(dens)
        if val > bound * (1 + 1e-12):
            raise SolitonLabError(f"J = {val} exceeds ||d^{s} z||^2 = {bound}")
    return val


def j_series(sampler, times, s, x0, beta, w, n=0, radial=False):
    vals = [j_functional(sampler.whole(t), s, x0, beta, w, n, radial=radial) for t in times]
    return FunctionalSeries("J", {"s": s, "x0": x0, "n": n, "weight": type(w.kind).__name__},
                            times, vals, floor=sampler.floor)


# -------------------------------------------------------- moment integrals

@dataclass
class MomentReport:
    """Moments ``M_{s,n}(t) = int_{x >= beta t} (d^s z)^2 (x - beta t)^n dx``."""

    series: dict
    fits: dict
    K: dict
    theta: float
    monotone_in_n: dict
    ladder: dict = field(default_factory=dict)


def weighted_decay_series(run, spec, s_max, n_max, beta, eta, t_start=10.0, t_end=None,
                          sampler=None, theta=None, ladder_weight=None):
    """Moment integrals of ``z`` beyond ``x = beta t`` and their exponential fits.

    ``K[(s, n)]`` is the least constant with ``M_{s,n}(t) <= K exp(-theta t)``
    on the fitted window. When ``ladder_weight`` (a right weight of rate
    ``sqrt(eta)`` with a built ladder) is given, the companion series
    ``int (d^s z)^2 phi_[n](x - beta t) dx`` is recorded as well.
    """
    from .rates import theta as _theta
    if not beta > max(spec.speeds if isinstance(spec, KdvNSolitonSpec) else [0.0]):
        raise InvalidParameterError("beta must exceed the largest speed")
    if not eta > 0:
        raise InvalidParameterError("eta must be positive")
    theta = _theta(spec.speeds) if theta is None else theta
    sampler = sampler or ResidualSampler(run, spec, s_max)
    times = np.array([t for t in run.times if t >= t_start - 1e-12
                      and (t_end is None or t <= t_end + 1e-12)])
    if times.size < 8:
        raise DegenerateFitError(f"{times.size} snapshots in the window; need at least 8")
    series, fits, K, lad = {}, {}, {}, {}
    for s in range(s_max + 1):
        for n in range(n_max + 1):
            vals = []
            for t in times:
                h = sampler.half(t, beta)
                vals.append(h.integrate(h.derivs[s] ** 2 * (h.x - beta * t) ** n))
            ser = FunctionalSeries("moment", {"s": s, "n": n, "x0": 0.0}, times, vals,
                                   floor=sampler.floor)
            series[(s, n)] = ser
            try:
                fits[(s, n)] = ser.fit()
            except DegenerateFitError as err:
                ser.notes.append(str(err))
                fits[(s, n)] = None
            K[(s, n)] = ser.smallest_constant(theta)
            if ladder_weight is not None:
                lad[(s, n)] = j_series(sampler, times, s, 0.0, beta, ladder_weight, n)
    mono = {s: all(K[(s, n + 1)] >= K[(s, n)] for n in range(n_max)) for s in range(s_max + 1)}
    return MomentReport(series, fits, K, theta, mono, lad)


# -------------------------------------------------------------- F_s energy

def fs_functional(run, spec, s, p, sampler=None, times=None):
    """``F_s(t) = int (d^s z)^2 - (2s+1)/3 p int (d^{s-1} z)^2 R^(p-1)``.

    Checks ``|F_s| <= ||z||_{H^s}^2 (1 + (2s+1) p / 3 max R^(p-1))`` at each time.
    """
    if s < 1:
        raise InvalidParameterError("F_s needs s >= 1")
    sampler = sampler or ResidualSampler(run, spec, s)
    if sampler.s_max < s:
        raise InvalidParameterError("sampler holds too few derivatives")
    times = run.times if times is None else np.asarray(times, dtype=float)
    vals = []
    coef = (2 * s + 1) / 3 * p
    for t in times:
        smp = sampler.whole(t)
        r = np.real(soliton_sum(spec, t, smp.x))
        rp = np.abs(r) ** (p - 1)
        f = smp.integrate(smp.derivs[s] ** 2) - coef * smp.integrate(smp.derivs[s - 1] ** 2 * rp)
        hs = sum(smp.integrate(smp.derivs[j] ** 2) for j in range(s + 1))
        if abs(f) > hs * (1 + coef * rp.max()) * (1 + 1e-12):
            raise SolitonLabError(f"|F_{s}({t})| = {abs(f)} breaks the triangle bound")
        vals.append(f)
    return FunctionalSeries(f"F_{s}", {"s": s}, times, vals, floor=sampler.floor)


# ------------------------------------------------------ interaction integrals

def _tail_amplitude(p, scale):
    p = float(p)
    return (scale * (p + 1) / 2) ** (1 / (p - 1)) * 2 ** (2 / (p - 1))


def _profile_breaks(p, scale, s, half_width, extra=()):
    rs = math.sqrt(scale)
    b = 0.5 * (float(p) - 1) * rs
    pts = [-half_width, half_width, *extra]
    if s > 0:
        for root in profile_polynomials(p, s)[s].roots():
            if abs(root.imag) < 1e-12 and abs(root.real) < 1:
                pts.append(math.atanh(root.real) / b)
    pts = np.unique(np.clip(pts, -half_width, half_width))
    step = 0.5 / rs
    out = [pts[0]]
    for a, c in zip(pts[:-1], pts[1:]):
        m = max(1, int(math.ceil((c - a) / step)))
        out.extend(np.linspace(a, c, m + 1)[1:])
    return np.array(out)


def interaction_integral(params, s, eta, beta, t, span=30.0):
    """``int |d^s R_j(t, x)| exp(sqrt(eta) (x - beta t)) dx`` (gKdV), or with
    ``|x|`` in the exponent (NLS).

    Gauss-Legendre panels split at the sign changes of the integrand cover
    ``|y| <= span / sqrt(c)`` around the crest; beyond, the integrand is
    its exponential tail and is integrated in closed form.
    """
    if s < 0:
        raise InvalidParameterError("s must be nonnegative")
    r = math.sqrt(eta)
    if isinstance(params, NlsSolitonParams):
        om, v = params.omega, params.v
        if not 0 < eta < om:
            raise InvalidParameterError(
                f"need 0 < eta < omega_j for a finite integral, got eta={eta}, omega={om}")
        if not beta > abs(v):
            raise InvalidParameterError(f"need beta > |v_j|, got beta={beta}, v={v}")
        rs = math.sqrt(om)
        xc = params.center(t)
        Y = max(span / rs, abs(xc) + 1.0)
        breaks = _profile_breaks(params.p, om, s if v == 0 else 0, Y, extra=(-xc,))
        y, wq = _gl_rule(breaks)
        acc = np.zeros(y.shape, dtype=complex)
        for k in range(s + 1):
            acc += math.comb(s, k) * profile_derivative(params.p, om, y, k) * (0.5j * v) ** (s - k)
        core = float(np.sum(wq * np.abs(acc) * np.exp(r * (np.abs(y + xc) - beta * t))))
        A = _tail_amplitude(params.p, om)
        right = A * abs(-rs + 0.5j * v) ** s * math.exp(r * (xc - beta * t) - (rs - r) * Y) / (rs - r)
        left = A * abs(rs + 0.5j * v) ** s * math.exp(r * (-xc - beta * t) - (rs - r) * Y) / (rs - r)
        return core + right + left
    if not isinstance(params, SolitonParams):
        raise InvalidParameterError("params must be SolitonParams or NlsSolitonParams")
    c = params.c
    if not 0 < eta < c:
        raise InvalidParameterError(f"need 0 < eta < c_j, got eta={eta}, c={c}")
    if not beta > c:
        raise InvalidParameterError(f"need beta > c_j, got beta={beta}, c={c}")
    rs = math.sqrt(c)
    Y = span / rs
    y, wq = _gl_rule(_profile_breaks(params.p, c, s, Y))
    core = float(np.sum(wq * np.abs(profile_derivative(params.p, c, y, s)) * np.exp(r * y)))
    A = _tail_amplitude(params.p, c) * rs ** s
    tails = A * (math.exp(-(rs - r) * Y) / (rs - r) + math.exp(-(rs + r) * Y) / (rs + r))
    return math.exp(r * (params.center(t) - beta * t)) * (core + tails)


def interaction_series(params, s, eta, beta, times):
    vals = [interaction_integral(params, s, eta, beta, t) for t in times]
    return FunctionalSeries("interaction", {"s": s, "x0": params.x0}, times, vals)


__all__ = [
    "Samples", "field_samples", "solution_samples", "soliton_sum", "residual",
    "ResidualSampler", "ExponentialFit", "fit_exponential", "FunctionalSeries",
    "i_functional", "i_functional_rate", "MonotonicityReport", "monotonicity_check",
    "j_functional", "j_series", "MomentReport", "weighted_decay_series",
    "fs_functional", "interaction_integral", "interaction_series",
]

"""JSON-configured scenarios: initial data, evolution, diagnostics, artifacts.

A scenario document (``schema_version`` 1) looks like::

    {
      "schema_version": 1,
      "name": "kdv2_exact",
      "equation": "gkdv", "p": 2,
      "solitons": [{"c": 1.0, "x0": 0.0}, {"c": 4.0, "x0": 0.0}],
      "initial_data": "exact_kdv",
      "grid": {"x_min": -100, "x_max": 300, "n": 4096},
      "solver": {"mode": "exact", "t_end": 60, "snapshot_every": 1.0},
      "rates": {"beta": 5.0},
      "diagnostics": {"select": ["decay_left", "monotonicity"]}
    }

Everything else has defaults; see :data:`SCHEMA` and :func:`parse_scenario`.
Outputs: ``snapshots/``, ``functional_series.csv``, ``decay_fits.csv``,
``constants.csv``, ``tables/*.dat`` (whitespace columns for gnuplot) and
``report.json``.
"""

import copy
import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .diagnostics import (ResidualSampler, fs_functional, interaction_series,
                          j_series, make_nls_rate_params, make_rate_params,
                          monotonicity_check, pointwise_decay_fit,
                          solution_samples, weighted_decay_series, weighted_sup)
from .errors import InvalidParameterError, SchemaError, SolitonLabError
from .grid import Field, Grid1D
from .integrable import KdvNSolitonSpec, kdv_nsoliton_values
from .profiles import NlsSolitonParams, SolitonParams
from .solver import (RunRecord, SolverConfig, evolve_gkdv, evolve_nls,
                     exact_kdv_run, multisoliton_initial_data, read_snapshots,
                     write_snapshots)
from .weights import RightArctan, WeightFamily

SCHEMA_VERSION = 1

DIAGNOSTICS = ("oracle", "conservation", "decay_left", "decay_solitons", "decay_right",
               "monotonicity", "moments", "j", "fs", "interaction")

_GKDV_ONLY = ("oracle", "decay_left", "decay_solitons", "decay_right", "monotonicity",
              "moments", "fs")

_num = {"type": "number"}
SCHEMA = {
    "type": "object",
    "required": ["schema_version", "equation", "p", "solitons", "grid"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "equation": {"enum": ["gkdv", "nls"]},
        "p": _num,
        "solitons": {
            "type": "array", "minItems": 1,
            "items": {
                "type": "object", "additionalProperties": False,
                "properties": {"c": _num, "x0": _num, "omega": _num, "v": _num,
                               "gamma": _num, "scale": _num},
            },
        },
        "initial_data": {"enum": ["exact_kdv", "sum_of_solitons"]},
        "grid": {
            "type": "object", "required": ["x_min", "x_max", "n"], "additionalProperties": False,
            "properties": {"x_min": _num, "x_max": _num, "n": {"type": "integer"}},
        },
        "solver": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["exact", "evolve"]},
                "dt": _num, "t_start": _num, "t_end": _num, "snapshot_every": _num,
                "scheme": {"enum": ["etdrk4", "ifrk4", "strang"]},
                "frame_velocity": _num, "dealias": {"type": "boolean"},
                "boundary_action": {"enum": ["raise", "warn"]},
                "amplitude_factor": _num,
            },
        },
        "rates": {
            "type": "object", "additionalProperties": False,
            "properties": {k: _num for k in ("alpha", "beta", "eta", "kappa_alpha",
                                             "kappa", "delta")},
        },
        "diagnostics": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "select": {"type": "array", "minItems": 1, "uniqueItems": True,
                           "items": {"enum": list(DIAGNOSTICS)}},
                "s_max": {"type": "integer", "minimum": 0},
                "n_max": {"type": "integer", "minimum": 0},
                "t_start": _num, "t_end": _num, "fit_time": _num,
                "t0": _num, "x0_sweep": {"type": "array", "items": _num, "minItems": 1},
                "floor": _num, "cap": _num, "fs_order": {"type": "integer", "minimum": 1},
            },
        },
        "output": {"type": "string"},
    },
}


@dataclass
class ScenarioConfig:
    """Validated scenario with every default filled in."""

    name: str
    equation: str
    p: float
    solitons: list
    initial_data: str
    grid: Grid1D
    solver: dict
    rates: object
    diagnostics: dict
    output: str
    document: dict

    @property
    def kdv_spec(self):
        if self.equation != "gkdv" or self.p != 2:
            return None
        return KdvNSolitonSpec(tuple(s.c for s in self.solitons),
                               tuple(s.x0 for s in self.solitons))

    @property
    def times(self):
        sv = self.solver
        n = int(round((sv["t_end"] - sv["t_start"]) / sv["snapshot_every"]))
        return tuple(sv["t_start"] + k * sv["snapshot_every"] for k in range(n + 1))


@dataclass
class ScenarioReport:
    config: dict
    status: str
    checks: list = field(default_factory=list)
    manifest: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c["pass"] for c in self.checks) and not self.errors

    def to_json(self):
        return json.dumps({"status": self.status, "passed": self.passed,
                           "config": self.config, "checks": self.checks,
                           "manifest": self.manifest, "timings": self.timings,
                           "errors": self.errors, "warnings": self.warnings},
                          indent=2, sort_keys=True, default=_jsonable)


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(type(v))


def _path(err):
    out = ""
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def _load(source):
    if isinstance(source, dict):
        return copy.deepcopy(source)
    with open(source) as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("<root>", f"invalid JSON: {exc}") from None


def parse_scenario(source):
    """Validate a scenario (path or dict) and apply defaults.

    Raises :class:`SchemaError` (with the offending field path) for
    structural problems and :class:`InvalidParameterError` for violated
    constraints such as ``0 < alpha < c_1``.
    """
    doc = _load(source)
    errs = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc),
                  key=lambda e: list(map(str, e.absolute_path)))
    if errs:
        raise SchemaError(_path(errs[0]), errs[0].message)
    eq, p = doc["equation"], doc["p"]
    sols = []
    for i, s in enumerate(doc["solitons"]):
        if eq == "gkdv":
            if "c" not in s:
                raise SchemaError(f"solitons[{i}].c", "required for gkdv")
            if i and not s["c"] > doc["solitons"][i - 1]["c"]:
                raise SchemaError(f"solitons[{i}].c", "speeds must be strictly increasing")
            try:
                sols.append(SolitonParams(p, s["c"], s.get("x0", 0.0)))
            except InvalidParameterError as exc:
                raise SchemaError(f"solitons[{i}]", str(exc)) from None
        else:
            if "omega" not in s:
                raise SchemaError(f"solitons[{i}].omega", "required for nls")
            try:
                sols.append(NlsSolitonParams(p, s["omega"], s.get("v", 0.0),
                                             s.get("gamma", 0.0), s.get("x0", 0.0)))
            except InvalidParameterError as exc:
                raise SchemaError(f"solitons[{i}]", str(exc)) from None
    scales = [float(s.get("scale", 1.0)) for s in doc["solitons"]]
    g = doc["grid"]
    try:
        grid = Grid1D(float(g["x_min"]), float(g["x_max"]), int(g["n"]))
    except InvalidParameterError as exc:
        raise SchemaError("grid", str(exc)) from None
    init = doc.get("initial_data", "exact_kdv" if eq == "gkdv" and p == 2 else "sum_of_solitons")
    if init == "exact_kdv" and not (eq == "gkdv" and p == 2):
        raise SchemaError("initial_data", "exact_kdv needs equation gkdv with p = 2")
    sv = dict(doc.get("solver", {}))
    sv.setdefault("mode", "exact" if init == "exact_kdv" and "dt" not in sv else "evolve")
    if sv["mode"] == "exact" and init != "exact_kdv":
        raise SchemaError("solver.mode", "exact mode needs exact_kdv initial data")
    sv.setdefault("t_start", 0.0)
    sv.setdefault("t_end", 10.0)
    sv.setdefault("snapshot_every", 1.0)
    if sv["mode"] == "evolve":
        sv.setdefault("dt", 1e-3 if eq == "gkdv" else 2.5e-4)
        # co-moving frame with the fastest crest keeps the stiff phase small
        sv.setdefault("frame_velocity", max(s.c for s in sols) if eq == "gkdv" else 0.0)
    if not sv["snapshot_every"] > 0:
        raise SchemaError("solver.snapshot_every", "must be positive")
    if any(v != 1.0 for v in scales) and init != "sum_of_solitons":
        raise SchemaError("solitons", "scale is only allowed with sum_of_solitons data")
    rt = doc.get("rates", {})
    if eq == "gkdv":
        rates = make_rate_params([s.c for s in sols], **rt)
    else:
        bad = set(rt) - {"beta", "eta"}
        if bad:
            raise SchemaError(f"rates.{sorted(bad)[0]}", "not used for nls")
        rates = make_nls_rate_params([s.omega for s in sols], [s.v for s in sols], **rt)
    dg = dict(doc.get("diagnostics", {}))
    dg.setdefault("select", ["conservation"] if sv["mode"] == "evolve" else ["decay_left"])
    dg.setdefault("s_max", 2)
    dg.setdefault("n_max", 4)
    dg.setdefault("t_start", 10.0)
    dg.setdefault("t_end", sv["t_end"])
    dg.setdefault("fit_time", 20.0)
    dg.setdefault("t0", dg["t_start"])
    dg.setdefault("x0_sweep", list(np.linspace(-40.0, 0.0, 9)))
    dg.setdefault("floor", 1e-12)
    dg.setdefault("cap", 1e-3)
    dg.setdefault("fs_order", 2)
    for i, name in enumerate(dg["select"]):
        if eq == "nls" and name in _GKDV_ONLY:
            raise SchemaError(f"diagnostics.select[{i}]", f"{name} is only defined for gkdv")
        if name == "oracle" and init != "exact_kdv":
            raise SchemaError(f"diagnostics.select[{i}]", "oracle needs exact_kdv initial data")
    out = doc.get("output", os.path.join("out", doc.get("name", "scenario")))
    cfg = ScenarioConfig(doc.get("name", "scenario"), eq, p, sols, init, grid, sv, rates,
                         dg, out, doc)
    cfg.solver["scales"] = scales
    return cfg


# ---------------------------------------------------------------- execution

def _initial(cfg):
    if cfg.initial_data == "exact_kdv":
        return multisoliton_initial_data(cfg.kdv_spec, cfg.grid, "exact_kdv", cfg.solver["t_start"])
    f = multisoliton_initial_data(cfg.solitons, cfg.grid, "sum_of_solitons", cfg.solver["t_start"])
    scales = cfg.solver["scales"]
    if any(s != 1.0 for s in scales):
        vals = np.zeros_like(f.values)
        for sp, a in zip(cfg.solitons, scales):
            one = multisoliton_initial_data([sp], cfg.grid, "sum_of_solitons", cfg.solver["t_start"])
            vals = vals + a * one.values
        f = Field(cfg.grid, vals, f.meta)
    return f


def _solver_config(cfg):
    sv = cfg.solver
    return SolverConfig(cfg.equation, cfg.p, sv["dt"], sv["t_end"], sv.get("scheme"),
                        sv["t_start"], cfg.times, sv.get("dealias", True),
                        boundary_action=sv.get("boundary_action", "warn"),
                        amplitude_factor=sv.get("amplitude_factor", 10.0),
                        frame_velocity=sv.get("frame_velocity", 0.0))


def build_run(cfg):
    if cfg.solver["mode"] == "exact":
        return exact_kdv_run(cfg.kdv_spec, cfg.grid, cfg.times)
    init = _initial(cfg)
    evolve = evolve_gkdv if cfg.equation == "gkdv" else evolve_nls
    return evolve(init, _solver_config(cfg))


class _Outputs:
    def __init__(self):
        self.series = []
        self.fits = []
        self.constants = []

    def add_series(self, ser):
        self.series.append(ser)

    def add_fit(self, r):
        self.fits.append(r)

    def add_constant(self, name, value, window):
        self.constants.append((name, value, window))


def _g(v):
    return f"{v:.17g}" if isinstance(v, (float, np.floating)) else str(v)


def _csv(rows, header):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for r in rows:
        wr.writerow([_g(v) for v in r])
    return buf.getvalue()


def _check(report, name, passed, measured, target, **extra):
    report.checks.append({"name": name, "pass": bool(passed), "measured": measured,
                          "target": target, **extra})


def _times_in(run, lo, hi):
    return np.array([t for t in run.times if lo - 1e-9 <= t <= hi + 1e-9])


def _diag_oracle(cfg, run, out, rep):
    spec = cfg.kdv_spec
    if spec is None or cfg.initial_data != "exact_kdv":
        raise InvalidParameterError("oracle comparison needs exact_kdv initial data")
    err = max(float(np.max(np.abs(f.values - kdv_nsoliton_values(spec, t, f.x))))
              for t, f in run.snapshots)
    out.add_constant("oracle_linf_error", err, f"[{run.times[0]}, {run.times[-1]}]")
    _check(rep, "oracle", err <= 1e-6, err, "<= 1e-6")


def _diag_conservation(cfg, run, out, rep):
    c = run.conservation
    res = {}
    for key, tol in (("mass", 1e-9), ("energy", 1e-8)):
        v0 = c[0][key]
        drift = max(abs(r[key] - v0) for r in c) / abs(v0)
        res[key] = drift
        out.add_constant(f"{key}_drift_rel", drift, f"[{c[0]['t']}, {c[-1]['t']}]")
        _check(rep, f"conservation.{key}", drift <= tol, drift, f"<= {tol:.0e}")


def _diag_decay_left(cfg, run, out, rep):
    t = cfg.diagnostics["fit_time"]
    smp = solution_samples(run, t, 1)
    dg = cfg.diagnostics
    target = math.sqrt(cfg.rates.speeds[0])
    for s in (0, 1):
        r = pointwise_decay_fit(smp, t, cfg.rates, "left", s, floor=dg["floor"], cap=dg["cap"])
        out.add_fit(r)
        _check(rep, f"decay_left.s{s}", abs(r.rate - target) <= 0.05 * target, r.rate,
               f"{target:.6g} +- 5%")


def _diag_decay_solitons(cfg, run, out, rep):
    t = cfg.diagnostics["fit_time"]
    dg = cfg.diagnostics
    smp = solution_samples(run, t, 0)
    for j, c in enumerate(cfg.rates.speeds, start=1):
        for flank in ("left", "right"):
            r = pointwise_decay_fit(smp, t, cfg.rates, f"soliton_{j}", 0, floor=dg["floor"],
                                    cap=dg["cap"], flank=flank)
            out.add_fit(r)
            tgt = math.sqrt(c)
            _check(rep, f"decay_soliton_{j}.{flank}", abs(r.rate - tgt) <= 0.05 * tgt, r.rate,
                   f"{tgt:.6g} +- 5%")


def _diag_decay_right(cfg, run, out, rep):
    dg = cfg.diagnostics
    beta = cfg.rates.beta
    times = _times_in(run, dg["t_start"], min(dg["t_end"], 40.0))
    s_max = min(dg["s_max"], 2)
    worst = -math.inf
    ok = True
    for s in range(s_max + 1):
        for n in range(7):
            sups = np.array([weighted_sup(solution_samples(run, t, s), t, beta, s, n)
                             for t in times])
            ok &= bool(np.all(np.isfinite(sups)) and np.all(np.diff(sups) <= 0))
            worst = max(worst, float(np.max(np.diff(sups) / sups[:-1])) if sups.size > 1 else 0.0)
    _check(rep, "decay_right.sup_nonincreasing", ok, worst, "relative increase <= 0")
    t = dg["t_start"]
    smp = solution_samples(run, t, 0)
    e = pointwise_decay_fit(smp, t, cfg.rates, "right", 0, floor=dg["floor"], cap=dg["cap"])
    a = pointwise_decay_fit(smp, t, cfg.rates, "right", 0, "algebraic", floor=dg["floor"],
                            cap=dg["cap"])
    out.add_fit(e)
    out.add_fit(a)
    tgt = math.sqrt(cfg.rates.speeds[-1])
    rep.checks.append({"name": "decay_right.exponential_rate", "pass": True, "measured": e.rate,
                       "target": f"{tgt:.6g} +- 5% (reported)", "informational": True,
                       "within": abs(e.rate - tgt) <= 0.05 * tgt,
                       "algebraic_rms": a.rms, "exponential_rms": e.rms})


def _diag_monotonicity(cfg, run, out, rep):
    dg = cfg.diagnostics
    x0 = dg["x0_sweep"]
    t0 = dg["t0"]
    t_end = float(run.times[-1])
    half = float(run.times[np.argmin(np.abs(run.times - 0.5 * t_end))])
    if not half > t0:
        raise InvalidParameterError(f"half horizon {half} does not exceed t0 = {t0}")
    p = int(cfg.p)
    sub = RunRecord(run.config, [(t, f) for t, f in run.snapshots if t <= half + 1e-9],
                    exact_spec=run.exact_spec)
    r_half = monotonicity_check(sub, t0, x0, cfg.rates, p)
    r_full = monotonicity_check(run, t0, x0, cfg.rates, p)
    for a, i_vals in zip(x0, r_full.values):
        out.add_series(_Series("I", {"x0": a, "n": "", "s": ""}, r_full.times, i_vals))
    out.add_constant("C1", r_full.C1, f"t0={t0}, t<={t_end}")
    out.add_constant("C1_half_horizon", r_half.C1, f"t0={t0}, t<={half}")
    out.add_constant("C1_level", r_full.C1_level, f"t0={t0}")
    out.add_constant("C0", r_full.C0, f"t0={t0}, t<={t_end}")
    drift = abs(r_full.C1 - r_half.C1) / r_full.C1 if r_full.C1 > 0 else 0.0
    _check(rep, "monotonicity.C1_stability", drift <= 0.10, drift, "<= 10%")
    _check(rep, "monotonicity.violations", r_full.violations == 0, r_full.violations, "0")
    i0 = int(np.argmin(np.abs(np.asarray(x0))))
    ratio = float(r_full.decay_ratio[i0])
    _check(rep, "monotonicity.I_decay", ratio <= 0.01, ratio, "<= 0.01")


def _sampler(cfg, run, cache, s_need):
    # exact runs share one arbitrary-precision sampler; grid runs take only
    # the derivatives they need so the resolution guard sees order s_need
    exact = cfg.kdv_spec is not None and run.exact_spec is not None
    s_max = max(cfg.diagnostics["s_max"], cfg.diagnostics["fs_order"]) if exact else s_need
    if s_max not in cache:
        spec = cfg.kdv_spec if exact else cfg.solitons
        cache[s_max] = ResidualSampler(run, spec, s_max, hi_speed=cfg.rates.beta)
    return cache[s_max]


def _speeds_theta(cfg):
    from .diagnostics.rates import theta
    return theta(cfg.rates.speeds)


def _diag_moments(cfg, run, out, rep, cache):
    dg = cfg.diagnostics
    smp = _sampler(cfg, run, cache, dg["s_max"])
    rp = cfg.rates
    mr = weighted_decay_series(run, smp.spec, dg["s_max"], dg["n_max"], rp.beta, rp.eta,
                               dg["t_start"], min(dg["t_end"], 40.0), sampler=smp)
    th = mr.theta
    worst = math.inf
    for (s, n), ser in mr.series.items():
        out.add_series(ser)
        f = mr.fits[(s, n)]
        out.add_constant(f"K_{s},{n}", mr.K[(s, n)], f"[{ser.t[0]}, {ser.t[-1]}]")
        if f is not None:
            out.add_constant(f"moment_rate_{s},{n}", f.rate, f"[{f.t_min}, {f.t_max}]")
            worst = min(worst, f.rate)
        else:
            worst = -math.inf
    _check(rep, "moments.rate", worst >= th, worst, f">= theta = {th:.6g}",
           K_monotone_in_n=mr.monotone_in_n)


def _diag_j(cfg, run, out, rep, cache):
    dg = cfg.diagnostics
    smp = _sampler(cfg, run, cache, 0)
    w = WeightFamily(RightArctan(cfg.rates.eta))
    times = _times_in(run, dg["t_start"], min(dg["t_end"], 40.0 if cfg.equation == "gkdv"
                                              else dg["t_end"]))
    ser = j_series(smp, times, 0, 0.0, cfg.rates.beta, w, radial=cfg.equation == "nls")
    out.add_series(ser)
    fit = ser.fit()
    out.add_constant("J_rate", fit.rate, f"[{fit.t_min}, {fit.t_max}]")
    if cfg.equation == "gkdv":
        th = _speeds_theta(cfg)
        out.add_constant("C(0,phi)", ser.smallest_constant(th), f"[{times[0]}, {times[-1]}]")
        _check(rep, "j.rate", fit.rate >= th, fit.rate, f">= theta = {th:.6g}")
    else:
        env = fit.envelope(ser.t)
        ok = fit.rate >= 0 and bool(np.all(ser.values <= 1.05 * env))
        _check(rep, "j.nonincreasing", ok, fit.rate, "envelope rate >= 0, J <= 1.05 envelope")


def _diag_fs(cfg, run, out, rep, cache):
    dg = cfg.diagnostics
    s = dg["fs_order"]
    smp = _sampler(cfg, run, cache, s)
    times = _times_in(run, dg["t_start"], min(dg["t_end"], 40.0))
    ser = fs_functional(run, smp.spec, s, cfg.p, sampler=smp, times=times)
    out.add_series(ser)
    fit = ser.fit()
    th = _speeds_theta(cfg)
    out.add_constant(f"F_{s}_rate", fit.rate, f"[{fit.t_min}, {fit.t_max}]")
    _check(rep, f"fs.F_{s}_rate", fit.rate >= 2 * th, fit.rate, f">= 2 theta = {2 * th:.6g}")


def _diag_interaction(cfg, run, out, rep):
    times = np.linspace(0.0, 20.0, 21)
    ok = True
    worst = 0.0
    for j, sp in enumerate(cfg.solitons):
        if cfg.equation == "gkdv":
            sp = SolitonParams(sp.p, sp.c, sp.x0)
        for s in range(5):
            ser = interaction_series(sp, s, cfg.rates.eta, cfg.rates.beta, times)
            ser.params["x0"] = j
            out.add_series(ser)
            excess = float(ser.values.max() / ser.values[0] - 1.0)
            worst = max(worst, excess)
            ok &= bool(np.all(np.isfinite(ser.values)) and excess <= 1e-12)
            out.add_constant(f"interaction_sup_{j}_{s}", float(ser.values.max()), "[0, 20]")
    _check(rep, "interaction.bounded", ok, worst, "sup_t value = value at t = 0")


class _Series:
    def __init__(self, functional, params, t, values):
        self.functional, self.params, self.t, self.values = functional, params, t, values

    def rows(self):
        p = self.params
        for t, v in zip(self.t, self.values):
            yield (self.functional, p.get("s", ""), p.get("x0", ""), p.get("n", ""), t, v)


def _series_label(ser):
    p = ser.params
    parts = [ser.functional.replace("/", "_")] + [f"{k}={p[k]}" for k in ("s", "n", "x0")
                                                  if p.get(k, "") != ""]
    return "_".join(str(v) for v in parts)


def _write_outputs(out, directory, report):
    os.makedirs(directory, exist_ok=True)
    files = {
        "functional_series.csv": _csv((r for ser in out.series for r in ser.rows()),
                                      ["functional", "s", "x0", "n", "t", "value"]),
        "decay_fits.csv": _csv(((r.region if not r.flank else f"{r.region}.{r.flank}", r.s,
                                 r.model, r.rate, r.r2, r.x_lo, r.x_hi, r.t) for r in out.fits),
                               ["region", "s", "model", "rate", "r2", "x_lo", "x_hi", "t"]),
        "constants.csv": _csv(out.constants, ["name", "value", "window"]),
    }
    for name, text in files.items():
        path = os.path.join(directory, name)
        with open(path, "w") as fh:
            fh.write(text)
        report.manifest.append(path)
    tdir = os.path.join(directory, "tables")
    os.makedirs(tdir, exist_ok=True)
    seen = set()
    for ser in out.series:
        label = _series_label(ser)
        if label in seen:
            continue
        seen.add(label)
        path = os.path.join(tdir, label + ".dat")
        with open(path, "w") as fh:
            fh.write(f"# {ser.functional} {ser.params}\n# t value\n")
            for t, v in zip(ser.t, ser.values):
                fh.write(f"{t:.17g} {v:.17g}\n")
        report.manifest.append(path)


def run_scenario(cfg, out_dir=None, replay=None):
    """Execute a scenario and write its artifacts.

    ``replay`` names a snapshot directory from an earlier run; evolution is
    then skipped and only the diagnostics run. Diagnostic failures are
    recorded in the report rather than raised; I/O errors propagate.
    """
    out_dir = cfg.output if out_dir is None else out_dir
    report = ScenarioReport(cfg.document, "running")
    clock = time.perf_counter()
    if replay is not None:
        run = read_snapshots(replay)
        if cfg.solver["mode"] == "exact":
            run.exact_spec = cfg.kdv_spec
        run.conservation = [{"t": t, **_cons(cfg, f)} for t, f in run.snapshots]
    else:
        try:
            run = build_run(cfg)
        except SolitonLabError as exc:
            report.status = "error"
            report.errors.append({"stage": "run", "type": type(exc).__name__, "message": str(exc)})
            _finish(report, out_dir)
            return report
    report.timings["run"] = time.perf_counter() - clock
    report.warnings.extend(run.warnings)
    report.status = run.status
    if replay is None:
        snap_dir = os.path.join(out_dir, "snapshots")
        report.manifest.extend(write_snapshots(run, snap_dir))
        report.manifest.append(os.path.join(snap_dir, "index.csv"))
        meta = os.path.join(snap_dir, "run_meta.json")
        with open(meta, "w") as fh:
            json.dump({"equation": cfg.equation, "p": cfg.p, "speeds": _speeds_of(cfg),
                       "status": run.status}, fh, indent=2, sort_keys=True)
        report.manifest.append(meta)
    out = _Outputs()
    cache = {}
    for name in cfg.diagnostics["select"]:
        t1 = time.perf_counter()
        try:
            fn = _DIAG[name]
            if name in ("moments", "j", "fs"):
                fn(cfg, run, out, report, cache)
            else:
                fn(cfg, run, out, report)
        except SolitonLabError as exc:
            report.errors.append({"stage": name, "type": type(exc).__name__, "message": str(exc)})
            _check(report, name, False, None, "completed without error")
        report.timings[name] = time.perf_counter() - t1
    _write_outputs(out, out_dir, report)
    if report.status.startswith("aborted"):
        report.errors.append({"stage": "run", "type": "AmplitudeGuard",
                              "message": report.status})
    report.timings["total"] = time.perf_counter() - clock
    _finish(report, out_dir)
    return report


def _speeds_of(cfg):
    if cfg.equation == "gkdv":
        return [s.c for s in cfg.solitons]
    return None


def _cons(cfg, f):
    from .solver import conserved_quantities
    return conserved_quantities(f, cfg.equation, cfg.p)


def _finish(report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "report.json")
    report.manifest.append(path)
    with open(path, "w") as fh:
        fh.write(report.to_json())


_DIAG = {
    "oracle": _diag_oracle,
    "conservation": _diag_conservation,
    "decay_left": _diag_decay_left,
    "decay_solitons": _diag_decay_solitons,
    "decay_right": _diag_decay_right,
    "monotonicity": _diag_monotonicity,
    "moments": _diag_moments,
    "j": _diag_j,
    "fs": _diag_fs,
    "interaction": _diag_interaction,
}

__all__ = ["SCHEMA", "SCHEMA_VERSION", "DIAGNOSTICS", "ScenarioConfig", "ScenarioReport",
           "parse_scenario", "build_run", "run_scenario"]

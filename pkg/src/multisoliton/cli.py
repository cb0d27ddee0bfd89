"""Command-line entry point.

Exit codes: 0 success, 1 a check failed, 2 runtime or usage error, 3 I/O error.
"""

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import __version__
from .diagnostics import make_rate_params, pointwise_decay_fit
from .diagnostics.functionals import field_samples
from .errors import SolitonLabError
from .grid import Grid1D
from .profiles import hs_growth_ratios, hs_recursion_residual
from .scenario import parse_scenario, run_scenario
from .solver import read_snapshots
from .weights import (LeftArctan, RightArctan, WeightCertificate, WeightFamily,
                      build_ladder, certify_ladder, certify_left_weight,
                      certify_right_weight)

EXIT_OK, EXIT_CHECK, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3
RECURSION_TOL = 1e-6


def _emit(text, path):
    if path:
        d = os.path.dirname(path)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args):
    cfg = parse_scenario(args.config)
    with warnings.catch_warnings():
        # run warnings are collected in report.json; only their count is printed
        warnings.simplefilter("ignore", RuntimeWarning)
        report = run_scenario(cfg, args.out, replay=args.replay)
    for c in report.checks:
        flag = "PASS" if c["pass"] else "FAIL"
        print(f"{flag}  {c['name']}: measured {c['measured']} (target {c['target']})")
    for e in report.errors:
        print(f"ERROR {e['stage']}: {e['type']}: {e['message']}", file=sys.stderr)
    if report.warnings:
        print(f"{len(report.warnings)} warning(s) recorded in the report", file=sys.stderr)
    print(f"status: {report.status}; report: {os.path.join(args.out or cfg.output, 'report.json')}")
    if report.errors:
        return EXIT_RUNTIME
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_verify_weights(args):
    cert = WeightCertificate("weights", ())
    if args.kappa is not None:
        cert = cert.extend(certify_left_weight(args.kappa).checks)
    if args.eta is not None:
        cert = cert.extend(certify_right_weight(args.eta).checks)
        if args.nmax > 0:
            w = build_ladder(WeightFamily(RightArctan(args.eta)), args.nmax)
            cert = cert.extend(certify_ladder(w, args.nmax))
    if not cert.checks:
        print("verify-weights: give --eta and/or --kappa", file=sys.stderr)
        return EXIT_RUNTIME
    _emit(cert.to_csv(), args.out)
    return EXIT_OK if cert.passed else EXIT_CHECK


def cmd_verify_profiles(args):
    grid = Grid1D(-args.half_width, args.half_width, args.n)
    p = args.p
    ratios = hs_growth_ratios(p, args.smax, grid)
    rows = []
    ok = True
    for s in range(args.smax + 1):
        res = hs_recursion_residual(p, s, grid) if s <= min(args.smax, 6) else float("nan")
        good = not res > RECURSION_TOL
        ok &= good
        rows.append((s, res, ratios[s], good))
    bound = float(np.max(ratios))
    lines = ["s,recursion_residual,growth_ratio,pass"]
    lines += [f"{s},{r:.17g},{g:.17g},{str(b).lower()}" for s, r, g, b in rows]
    lines.append(f"# sup growth ratio over s <= {args.smax}: {bound:.17g}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok and np.isfinite(bound) else EXIT_CHECK


def _meta(directory):
    path = os.path.join(directory, "run_meta.json")
    if os.path.exists(path):
        with open(path) as fh:
            return json.load(fh)
    return {}


def cmd_fit_decay(args):
    run = read_snapshots(args.snapshots)
    speeds = args.speeds or _meta(args.snapshots).get("speeds")
    if not speeds:
        print("fit-decay: speeds unknown; pass --speeds", file=sys.stderr)
        return EXIT_RUNTIME
    params = make_rate_params(speeds, alpha=args.alpha, beta=args.beta)
    times = run.times if args.t is None else [args.t]
    rows = []
    for t in times:
        f = run.snapshot(t)
        smp = field_samples(f, args.s, t)
        r = pointwise_decay_fit(smp, t, params, args.region, args.s, args.model,
                                floor=args.floor, cap=args.cap, flank=args.flank)
        rows.append(r)
    out = ["region,s,model,rate,r2,x_lo,x_hi,t"]
    for r in rows:
        region = f"{r.region}.{r.flank}" if r.flank else r.region
        out.append(",".join([region, str(r.s), r.model] +
                            [f"{v:.17g}" for v in (r.rate, r.r2, r.x_lo, r.x_hi, r.t)]))
    _emit("\n".join(out) + "\n", args.out)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="multisoliton",
                                 description="Multi-soliton numerics for gKdV and NLS.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a JSON scenario")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None)
    r.add_argument("--replay", default=None, help="snapshot directory: diagnostics only")
    r.set_defaults(func=cmd_run)

    w = sub.add_parser("verify-weights", help="certify the weight-function properties")
    w.add_argument("--eta", type=float, default=None)
    w.add_argument("--kappa", type=float, default=None)
    w.add_argument("--nmax", type=int, default=10)
    w.add_argument("--out", default=None)
    w.set_defaults(func=cmd_verify_weights)

    v = sub.add_parser("verify-profiles", help="ground-state recursion and growth checks")
    v.add_argument("--p", type=int, required=True)
    v.add_argument("--smax", type=int, default=6)
    v.add_argument("--n", type=int, default=1024)
    v.add_argument("--half-width", type=float, default=40.0)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify_profiles)

    f = sub.add_parser("fit-decay", help="decay fits on stored snapshots")
    f.add_argument("--snapshots", required=True)
    f.add_argument("--region", required=True)
    f.add_argument("--s", type=int, default=0)
    f.add_argument("--model", choices=("exponential", "algebraic"), default="exponential")
    f.add_argument("--flank", choices=("left", "right"), default="right")
    f.add_argument("--speeds", type=float, nargs="+", default=None)
    f.add_argument("--alpha", type=float, default=None)
    f.add_argument("--beta", type=float, default=None)
    f.add_argument("--t", type=float, default=None)
    f.add_argument("--floor", type=float, default=1e-12)
    f.add_argument("--cap", type=float, default=1e-3)
    f.add_argument("--out", default=None)
    f.set_defaults(func=cmd_fit_decay)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_RUNTIME
    try:
        return args.func(args)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SolitonLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

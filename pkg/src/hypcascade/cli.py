"""Command-line interface: ``hypcascade {simulate,analyze,splinter,verify,plot}``.

Exit status: 0 on success, 1 when a verification check fails, 2 on usage
errors (bad flags or parameters).
"""
from __future__ import annotations

import argparse
import collections
import sys
from pathlib import Path

import numpy as np

from . import analytics, cascade, formats, svg, verify
from .analytics import RateSpeed, SplinterLaw
from .cascade import DirectionPolicy, ModelParams

__all__ = ["main", "build_parser"]

POLICIES = [p.value for p in DirectionPolicy]


class UsageError(Exception):
    pass


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _model_flags(p, horizon_default=1.0, reps_default=1):
    p.add_argument("--c", type=float, default=1.0, help="hyperbolic speed")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="Poisson rate")
    p.add_argument("--t", type=float, default=horizon_default, help="time horizon")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--reps", type=int, default=reps_default)
    p.add_argument("--policy", choices=POLICIES, default="random")
    p.add_argument("--path-dt", type=float, default=0.01)


def _curve_flags(p):
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--t-max", type=float, default=5.0)
    p.add_argument("--dt", type=float, default=0.1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypcascade", description="Simulate, analyze and plot branching random motion on the hyperbolic plane.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate cascades and write a JSON archive")
    _model_flags(s, reps_default=1000)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--timestamp", choices=["fixed", "now"], default="fixed")
    s.add_argument("--out", default="runs.json")

    a = sub.add_parser("analyze", help="closed-form mean curves as CSV")
    _curve_flags(a)
    a.add_argument("--out", default="curve.csv")

    k = sub.add_parser("splinter", help="defective mean of the k-th splinter as CSV")
    _curve_flags(k)
    k.add_argument("--k", type=int, default=1)
    k.add_argument("--out", default="splinter.csv")

    v = sub.add_parser("verify", help="run the verification suite")
    v.add_argument("--suite", choices=verify.SUITES, default="all")
    v.add_argument("--seed", type=_u64, default=0)
    v.add_argument("--reps", type=int, default=100_000)
    v.add_argument("--threads", type=int, default=1)
    v.add_argument("--perturb", type=float, default=1.0,
                   help="scale closed-form values by this factor (sensitivity control)")
    v.add_argument("--out", default="report.json")

    p = sub.add_parser("plot", help="SVG trajectory plots")
    _model_flags(p)
    p.add_argument("--archive", help="plot a run from this archive instead of simulating")
    p.add_argument("--run", type=int, default=0, help="run index within the archive")
    p.add_argument("--model", choices=["halfplane", "disk", "both"], default="both")
    p.add_argument("--labels", action="store_true", help="annotate splinter masses")
    p.add_argument("--out", default="cascade.svg")
    return ap


def _params(args, reps=None) -> ModelParams:
    try:
        return ModelParams(c=args.c, lam=args.lam, horizon=args.t, seed=args.seed,
                           reps=args.reps if reps is None else reps,
                           direction_policy=args.policy, path_dt=args.path_dt)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _rate_speed(args) -> RateSpeed:
    try:
        return RateSpeed(args.c, args.lam)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _grid(t_max: float, dt: float) -> np.ndarray:
    if not (t_max > 0 and dt > 0):
        raise UsageError("need --t-max > 0 and --dt > 0")
    n = int(round(t_max / dt))
    return np.linspace(0.0, n * dt, n + 1)


def cmd_simulate(args) -> int:
    params = _params(args)
    runs = cascade.simulate(params, workers=max(1, args.threads))
    archive = formats.RunArchive(params, tuple(runs), formats.created_stamp(args.timestamp))
    formats.save_archive(args.out, archive)
    counts = collections.Counter(r.n_events for r in runs)
    print(f"{len(runs)} runs written to {args.out}")
    print("events  runs")
    for n in sorted(counts):
        print(f"{n:6d}  {counts[n]}")
    if len(runs) >= 2:
        est = verify.mc_estimate([r.cosh_eta_cm for r in runs])
        print(f"mean cosh(eta_cm) = {est.mean:.6f} +- {est.std_error:.6f}")
    else:
        print(f"cosh(eta_cm) = {runs[0].cosh_eta_cm:.6f}")
    return 0


def cmd_analyze(args) -> int:
    rs = _rate_speed(args)
    ts = _grid(args.t_max, args.dt)
    cols = ["t", "mean_cosh_cm", "derivative", "ode_rhs", "mean_cosh_all_deviating"]
    rows = zip(ts, analytics.mean_cosh_cm(rs, ts), analytics.mean_cosh_cm_derivative(rs, ts),
               analytics.ode_rhs(rs, ts), analytics.mean_cosh_all_deviating(rs, ts))
    comments = [f"c: {rs.c!r}", f"lambda: {rs.lam!r}"]
    if analytics.in_limit_window(rs):
        comments.append(f"mean_cosh_cm uses the lambda = 3c limit form (|lambda-3c|/c < {analytics.LIMIT_WINDOW})")
    formats.write_curve_csv(args.out, cols, rows, comments)
    print(f"{len(ts)} rows written to {args.out}")
    return 0


def cmd_splinter(args) -> int:
    if args.k < 0:
        raise UsageError("--k must be non-negative")
    rs = _rate_speed(args)
    ts = _grid(args.t_max, args.dt)
    sl = SplinterLaw(args.k, rs.c, rs.lam)
    rows = [(t, analytics.mean_cosh_splinter(sl, float(t))) for t in ts]
    comments = [f"c: {rs.c!r}", f"lambda: {rs.lam!r}", f"k: {args.k}",
                "defective mean E[cosh(eta_k(t)) 1{N(t) >= k}]"]
    formats.write_curve_csv(args.out, ["t", f"mean_cosh_splinter_{args.k}"], rows, comments)
    print(f"{len(ts)} rows written to {args.out}")
    return 0


def cmd_verify(args) -> int:
    if args.reps < 100:
        raise UsageError("--reps must be at least 100")
    reports = verify.run_suite(args.suite, seed=args.seed, reps=args.reps,
                               workers=max(1, args.threads), perturb=args.perturb)
    doc = verify.report_json(reports, args.suite, args.seed)
    formats.write_json(args.out, doc)
    print(verify.format_table(reports))
    print(f"{'all checks passed' if doc['passed'] else 'VERIFICATION FAILED'}; report in {args.out}")
    return 0 if doc["passed"] else 1


def _suffixed(out: str, tag: str) -> Path:
    p = Path(out)
    return p.with_name(f"{p.stem}_{tag}{p.suffix or '.svg'}")


def cmd_plot(args) -> int:
    if args.archive:
        archive = formats.load_archive(args.archive)
        if not 0 <= args.run < len(archive.runs):
            raise UsageError(f"--run must be in [0, {len(archive.runs)})")
        run = archive.runs[args.run]
    else:
        params = _params(args, reps=1)
        run = cascade.build_cascade(params, cascade.replication_stream(params.seed, 0))
    traj = cascade.sample_trajectories(run)
    masses = [s.mass for s in run.splinters]
    outputs = []
    if args.model in ("halfplane", "both"):
        text = svg.render_halfplane([xy for xy, _ in traj], masses, args.labels)
        outputs.append((_suffixed(args.out, "halfplane") if args.model == "both" else Path(args.out), text))
    if args.model in ("disk", "both"):
        text = svg.render_disk([uv for _, uv in traj], masses, args.labels)
        outputs.append((_suffixed(args.out, "disk") if args.model == "both" else Path(args.out), text))
    for path, text in outputs:
        formats.write_atomic(path, text)
        print(f"wrote {path}")
    return 0


COMMANDS = {"simulate": cmd_simulate, "analyze": cmd_analyze, "splinter": cmd_splinter,
            "verify": cmd_verify, "plot": cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        parser.error(str(e))
    except formats.ArchiveVersionError as e:
        print(f"hypcascade: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

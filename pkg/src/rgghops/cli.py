"""Command-line entry point: ``rgghops <subcommand> [options]``.

Exit codes: 0 on success, 1 when a run reports acceptance-flagged failures
(bound violations, unsound certificates, failed tail cells, ...), 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from . import io as rio
from .harness import ExperimentConfig, default_jobs, resolve_radius
from .sampler import SeedSpec, sample_poissonized, sample_uniform
from .spatial_graph import bfs_distance, build_graph

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_USAGE = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _csv_list(kind):
    def parse(text):
        try:
            return [kind(x) for x in text.split(",") if x.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {text!r}") from None

    return parse


def _n_value(text):
    value = float(text)
    if value != int(value) or value < 2:
        raise argparse.ArgumentTypeError(f"n must be an integer >= 2, got {text}")
    return int(value)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_nonneg_int, default=0, help="master seed (default 0)")
    common.add_argument("--out", default=None, help="output file (default: JSON report on stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="report format")
    common.add_argument(
        "--jobs", type=_positive_int, default=None,
        help=f"worker processes (default ${harness.JOBS_ENV} or 1)",
    )

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--n", type=_csv_list(_n_value), default=[1000], help="comma-separated n values")
    grid.add_argument(
        "--r", default="rc",
        help="comma-separated radii: numbers, rc, rc*x, x*rc, 70sqrtlog",
    )
    grid.add_argument("--trials", type=_positive_int, default=1)

    p = _Parser(prog="rgghops", description="Hop counts in random geometric graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="sample an instance to a point CSV + JSON sidecar")
    g.add_argument("--n", type=_n_value, required=True)
    g.add_argument("--r", required=True)
    g.add_argument("--trial", type=_nonneg_int, default=0, help="trial index of the substream")
    g.add_argument("--model", choices=("uniform", "poisson"), default="uniform")
    g.add_argument("--edges", default=None, help="also write the edge list CSV here")

    d = sub.add_parser("dist", parents=[common], help="hop distance between two vertices of a point file")
    d.add_argument("--points", required=True, help="point CSV written by gen")
    d.add_argument("--u", type=_nonneg_int, required=True)
    d.add_argument("--v", type=_nonneg_int, required=True)
    d.add_argument("--path", action="store_true", help="include the vertex path")

    v = sub.add_parser("verify", parents=[common, grid], help="check the hop-count bounds on sampled pairs")
    v.add_argument("--pairs", type=_nonneg_int, default=20, help="random pairs per trial")
    v.add_argument("--no-corners", action="store_true", help="skip the corner-square pairs")

    t = sub.add_parser("threshold", parents=[common, grid], help="connectivity frequency sweep over r")

    dm = sub.add_parser("diameter", parents=[common, grid], help="diameter against the closed-form bound")
    dm.add_argument("--mode", choices=("auto", "exact", "bounded"), default="auto")
    dm.add_argument("--max-bfs", type=_positive_int, default=64)
    dm.add_argument("--prior-c", type=float, default=1.0)

    s = sub.add_parser("strip-path", parents=[common, grid], help="greedy strip path vs BFS")
    s.add_argument("--pairs", type=_nonneg_int, default=20)
    s.add_argument("--delta", type=float, default=None, help="override delta (default max(J, gamma))")

    c = sub.add_parser("certify", parents=[common, grid], help="lower-chain certificate soundness")
    c.add_argument("--pairs", type=_nonneg_int, default=20)

    tl = sub.add_parser("tails", parents=[common], help="Monte Carlo check of exponential-sum tail bounds")
    tl.add_argument("--N", dest="N", type=_csv_list(int), default=[1, 10, 50, 200])
    tl.add_argument("--delta", type=_csv_list(float), default=[0.1, 0.5, 1.0])
    tl.add_argument("--trials", type=_positive_int, default=100_000, help="samples per cell")

    t.set_defaults(r="0.5*rc,rc,1.5*rc,2*rc")
    return p


def _emit(obj, args):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


def _cmd_gen(args) -> int:
    if not args.out:
        raise _UsageError("gen needs --out")
    if args.out.endswith(".json"):
        raise _UsageError("--out must name the point CSV, not the JSON sidecar")
    r = resolve_radius(args.r, args.n)
    seed = SeedSpec(args.seed, args.trial)
    inst = sample_uniform(args.n, r, seed) if args.model == "uniform" else sample_poissonized(args.n, r, seed)
    side = rio.write_points(inst, args.out)
    msg = {"points": args.out, "sidecar": str(side), "realized_count": inst.realized_count, "r": r}
    if args.edges:
        msg["edges"] = rio.write_edges(build_graph(inst, adjacency="eager"), args.edges)
    print(json.dumps(msg, sort_keys=True))
    return EXIT_OK


def _cmd_dist(args) -> int:
    inst = rio.read_points(args.points)
    m = inst.realized_count
    for flag, idx in (("--u", args.u), ("--v", args.v)):
        if idx >= m:
            raise _UsageError(f"{flag} {idx} out of range for {m} vertices")
    res = bfs_distance(build_graph(inst), args.u, args.v, want_path=args.path)
    out = {"u": res.source, "v": res.target, "hops": res.hops, "reachable": res.reachable}
    if args.path:
        out["path"] = res.path
    _emit(out, args)
    return EXIT_OK


_EXPERIMENT_OF = {
    "verify": harness.VERIFY,
    "threshold": harness.THRESHOLD,
    "diameter": harness.DIAMETER,
    "strip-path": harness.STRIP_PATH,
    "certify": harness.CERTIFICATE,
    "tails": harness.TAILS,
}


def _config(args) -> ExperimentConfig:
    kind = _EXPERIMENT_OF[args.command]
    kw = dict(experiment=kind, master_seed=args.seed, output_path=args.out, format=args.format)
    if kind == harness.TAILS:
        kw.update(tail_N=args.N, tail_delta=args.delta, tail_trials=args.trials)
        return ExperimentConfig(**kw)
    kw.update(n_list=args.n, r_list=[x.strip() for x in args.r.split(",") if x.strip()], trials=args.trials)
    if hasattr(args, "pairs"):
        kw["pairs_per_trial"] = args.pairs
    if kind == harness.VERIFY:
        kw["corner_pairs"] = not args.no_corners
    elif kind == harness.DIAMETER:
        kw.update(diameter_mode=args.mode, max_bfs=args.max_bfs, prior_c=args.prior_c)
    elif kind == harness.STRIP_PATH:
        kw["delta"] = args.delta
    return ExperimentConfig(**kw)


def _cmd_experiment(args) -> int:
    if args.format == "csv" and not args.out:
        raise _UsageError("--format csv needs --out")
    try:
        cfg = _config(args)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    jobs = args.jobs if args.jobs is not None else default_jobs()
    report = harness.run_experiment(cfg, jobs=jobs)
    if args.out:
        # The summary goes to stdout so a CSV run still shows the verdict.
        print(json.dumps({"summary": report["summary"], "canonical_sha256": report["canonical_sha256"]},
                         sort_keys=True, default=float))
    else:
        print(json.dumps(report, indent=2, sort_keys=True, default=float))
    return EXIT_FAILURES if report["summary"]["failures"] else EXIT_OK


_COMMANDS = {"gen": _cmd_gen, "dist": _cmd_dist}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    handler = _COMMANDS.get(args.command, _cmd_experiment)
    try:
        return handler(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rgghops {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, FileNotFoundError) as exc:
        print(f"rgghops {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())

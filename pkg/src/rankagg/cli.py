"""Command-line entry point.

Exit codes: 0 success, 2 validation error, 3 oracle cap exceeded,
4 gossip trials still short of consensus at ``--tmax``.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import secrets
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rankagg import io
from rankagg.aggregate import (
    PositionalScores,
    Profile,
    borda_aggregate,
    generalized_borda,
    kemeny_exact,
    local_search_aggregate,
)
from rankagg.distance import METRICS, TOL, Metric
from rankagg.errors import DegenerateGapError, OracleCapExceeded, UnreachableError, ValidationError
from rankagg.gossip import (
    build_mixing_matrix,
    gap_and_spread,
    lambda2,
    run_trials,
    tail_from_times,
    theoretical_bound,
)
from rankagg.selftest import run_selftest

EXIT_OK, EXIT_VALIDATION, EXIT_CAP, EXIT_TIMEOUT = 0, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    paths: dict[str, Path] = field(default_factory=dict)
    seed: int | None = None
    fmt: str = "text"
    tolerance: float = TOL

    def validate_paths(self):
        for name, path in self.paths.items():
            if path is not None and not Path(path).is_file():
                raise ValidationError(f"--{name}: no such file: {path}")

    def resolve_seed(self, out) -> int:
        if self.seed is None:
            self.seed = secrets.randbits(63)
            out.write(f"# generated seed={self.seed}\n")
        return self.seed


def _num(x) -> str:
    """Shortest round-trip decimal; integral values print without a fraction."""
    x = float(x)
    if np.isfinite(x) and x == int(x) and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def _build_metric(args, n: int) -> Metric:
    name = args.distance
    weights = table = None
    if name == "wkendall":
        if not args.weights:
            raise ValidationError("--distance wkendall requires --weights")
        weights = io.read_adjacent_weights(args.weights)
        if weights.n != n:
            raise ValidationError(f"weight file has {len(weights.weights)} entries, expected {n - 1}")
    elif name in ("wcayley", "gendist"):
        if not args.weights:
            raise ValidationError(f"--distance {name} requires --weights")
        table = io.read_transposition_table(args.weights, n)
    return Metric(name=name, weights=weights, table=table, exact=getattr(args, "exact", False), cap=args.cap)


def cmd_dist(args, out) -> int:
    if args.file:
        perms = io.read_rankings(args.file)
        if len(perms) != 2:
            raise ValidationError(f"{args.file} must contain exactly two rankings")
        p, q = perms
    else:
        if not args.first or not args.second:
            raise ValidationError("give two rankings separated by '--', or --file")
        p, q = io.parse_ranking(args.first), io.parse_ranking(args.second)
    if p.n != q.n:
        raise ValidationError(f"rankings have different lengths ({p.n} vs {q.n})")
    metric = _build_metric(args, p.n)
    try:
        value = metric(p, q)
    except UnreachableError:
        value = float("inf")
    out.write(f"{float(value):.12g}\n")
    return EXIT_OK


def cmd_aggregate(args, out) -> int:
    cfg = RunConfig("aggregate", {"profile": args.profile, "phi": args.phi, "weights": args.weights}, args.seed)
    cfg.validate_paths()
    profile = Profile(io.read_rankings(args.profile))
    record = {"command": "aggregate", "rule": args.rule, "m": profile.m, "n": profile.n}
    if args.rule == "borda":
        ranking, scores = borda_aggregate(profile)
        record["scores"] = scores.tolist()
    elif args.rule == "genborda":
        if not args.phi:
            raise ValidationError("--rule genborda requires --phi")
        pos = PositionalScores(io.read_values(args.phi))
        ranking, scores = generalized_borda(profile, pos)
        record["phi"] = list(pos.phi)
        record["scores"] = scores.tolist()
    else:
        metric = _build_metric(args, profile.n)
        record["distance"] = metric.name
        if args.rule == "kemeny":
            ranking, cost = kemeny_exact(profile, metric, cap=args.cap)
        else:
            rng = None
            start = None
            if args.random_start:
                rng = np.random.default_rng(cfg.resolve_seed(out))
                start = "random"
            ranking, cost = local_search_aggregate(profile, metric, start=start, rng=rng)
        record["cost"] = float(cost)
    record["ranking"] = list(ranking.entries)
    record["seed"] = cfg.seed
    record["tolerance"] = cfg.tolerance
    out.write(io.format_ranking(ranking) + "\n")
    sidecar = Path(args.json) if args.json else Path(f"{args.profile}.{args.rule}.json")
    sidecar.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _parse_grid(text: str) -> list[int]:
    try:
        grid = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValidationError(f"--grid must be comma-separated integers, got {text!r}") from None
    if not grid or min(grid) < 0:
        raise ValidationError("--grid needs nonnegative integers")
    return grid


def _load_gossip_inputs(args):
    cfg = RunConfig(args.command, {"profile": args.profile, "network": args.network}, getattr(args, "seed", None))
    cfg.validate_paths()
    profile = Profile(io.read_rankings(args.profile))
    network = io.read_network(args.network)
    if network.m != profile.m:
        raise ValidationError(f"network has {network.m} agents but the profile has {profile.m} rankings")
    return cfg, profile, network


def cmd_gossip(args, out) -> int:
    cfg, profile, network = _load_gossip_inputs(args)
    grid = _parse_grid(args.grid)
    if args.trials < 1:
        raise ValidationError("--trials must be >= 1")
    if args.tmax < max(grid):
        raise ValidationError("--tmax must be at least the largest grid time")
    inputs = gap_and_spread(profile)
    if inputs.degenerate:
        raise DegenerateGapError("degenerate gaps: tied average scores")
    seed = cfg.resolve_seed(out)
    lam = lambda2(build_mixing_matrix(network))
    inputs = inputs.with_lambda2(lam)
    batch = run_trials(profile, network, args.trials, args.tmax, np.random.default_rng(seed), grid=grid)
    buf = _io.StringIO()
    buf.write(f"# seed={seed}\n# trials={args.trials} tmax={args.tmax} m={profile.m} n={profile.n} lambda2={lam!r}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "empirical_tail", "wilson_lo", "wilson_hi", "theoretical_bound"])
    for point in tail_from_times(batch.T, grid):
        bound = theoretical_bound(point.t, inputs) if lam < 1 else float("nan")
        writer.writerow([point.t, _num(point.tail), _num(point.wilson_lo), _num(point.wilson_hi), _num(bound)])
    text = buf.getvalue()
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    timeouts = int(np.count_nonzero(~np.isfinite(batch.T)))
    if timeouts:
        print(f"rankagg: {timeouts} of {args.trials} trials had no consensus by t={args.tmax}", file=sys.stderr)
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_bound(args, out) -> int:
    _, profile, network = _load_gossip_inputs(args)
    if args.t < 0:
        raise ValidationError("--t must be nonnegative")
    lam = lambda2(build_mixing_matrix(network))
    inputs = gap_and_spread(profile).with_lambda2(lam)
    value = theoretical_bound(args.t, inputs)
    ratios = (inputs.d / inputs.r).tolist()
    if args.format == "json":
        record = {
            "t": args.t,
            "bound": value,
            "m": inputs.m,
            "lambda2": lam,
            "objects": list(inputs.order),
            "d_over_r": ratios,
        }
        out.write(json.dumps(record, sort_keys=True) + "\n")
    else:
        out.write(f"bound {_num(value)}\nm {inputs.m}\nlambda2 {_num(lam)}\n")
        for obj, ratio in zip(inputs.order, ratios):
            out.write(f"object {obj} d/r {_num(ratio)}\n")
    return EXIT_OK


def cmd_selftest(args, out) -> int:
    ok = run_selftest(lambda line: out.write(line + "\n"))
    return EXIT_OK if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankagg", description="Rank aggregation distances and gossip simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def distance_opts(p, default="kendall"):
        p.add_argument("--distance", choices=METRICS, default=default)
        p.add_argument("--weights", help="adjacent weights (one per line) or 'a b w' transposition table")
        p.add_argument("--exact", action="store_true", help="use the shortest-path oracle for wkendall")
        p.add_argument("--cap", type=int, default=8, help="largest n for exhaustive routines")

    p = sub.add_parser("dist", help="distance between two rankings: dist [opts] 4 3 1 2 -- 1 2 3 4")
    distance_opts(p)
    p.add_argument("--file", help="file holding exactly two rankings")
    p.add_argument("first", nargs="*")

    p = sub.add_parser("aggregate", help="aggregate a profile file")
    p.add_argument("--rule", choices=("borda", "genborda", "kemeny", "local"), required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--phi", help="positional increments, one per line")
    p.add_argument("--json", help="sidecar path (default: <profile>.<rule>.json)")
    p.add_argument("--seed", type=int)
    p.add_argument("--random-start", action="store_true", help="local search from a seeded random ranking")
    distance_opts(p)

    p = sub.add_parser("gossip", help="Monte Carlo consensus-time tail vs the spectral bound (CSV)")
    p.add_argument("--profile", required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--tmax", type=int, default=10_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid", required=True, help="comma-separated times, e.g. 0,10,50")
    p.add_argument("--output", help="write CSV here instead of standard output")

    p = sub.add_parser("bound", help="evaluate the consensus-time tail bound")
    p.add_argument("--profile", required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")

    sub.add_parser("selftest", help="run the built-in invariant checks")
    return parser


COMMANDS = {
    "dist": cmd_dist,
    "aggregate": cmd_aggregate,
    "gossip": cmd_gossip,
    "bound": cmd_bound,
    "selftest": cmd_selftest,
}


def main(argv=None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    second = []
    if argv and argv[0] == "dist" and "--" in argv:
        cut = argv.index("--")
        argv, second = argv[:cut], argv[cut + 1 :]
    args = build_parser().parse_args(argv)
    args.second = second
    try:
        return COMMANDS[args.command](args, out)
    except OracleCapExceeded as exc:
        print(f"rankagg: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValidationError, DegenerateGapError) as exc:
        print(f"rankagg: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

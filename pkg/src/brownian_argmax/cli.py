"""Command-line entry point.

Exit codes: 0 on success with every statistical check passing, 1 when any check
fails, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import secrets
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, rng
from .brownian import dump_csv, simulate
from .distributions import BetaSpec, beta_cdf, f_m_density
from .experiments import (
    CampaignConfig,
    empirical_dn_table,
    joint_campaign,
    run_theta_campaign,
    verification_reports,
)
from .gue import sample_lambda_max
from .maximizer import maximize

OUT_ENV = "BROWNIAN_ARGMAX_OUT"


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_json(path: Path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(out: Path, command: str, config: dict, seed: int, started: datetime) -> None:
    write_json(
        out / "manifest.json",
        {
            "command": command,
            "config": config,
            "master_seed": seed,
            "version": __version__,
            "started": started.isoformat(),
            "finished": datetime.now(timezone.utc).isoformat(),
        },
    )


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value <= rng.U64_MAX:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer: {text}")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return value


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1): {text}")
    return value


def _add_seed(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=_u64, default=0, help="master seed (unsigned 64-bit, default 0)")
    p.add_argument("--fresh-seed", action="store_true", help="draw a new master seed from OS entropy")


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None,
                   help=f"output directory (falls back to ${OUT_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="brownian-argmax", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("maximize", help="maximize the partition sum on one simulated grid")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--stream", type=_u64, default=0, help="replica stream id")
    p.add_argument("--dump", action="store_true", help="include the path values in the output")
    _add_seed(p)

    p = sub.add_parser("verify", help="run the maximizer campaign and every statistical check")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--n-grid", type=_positive, default=4096)
    p.add_argument("--replicas", type=_positive, default=2000)
    p.add_argument("--alpha", type=_probability, default=0.01)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--refine", action="store_true", help="repeat the theta checks at twice the grid size")
    _add_seed(p)
    _add_out(p)

    p = sub.add_parser("gue", help="sample the largest GUE eigenvalue")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--count", type=_positive, required=True)
    p.add_argument("--out", required=True, help="CSV file, one value per line")
    _add_seed(p)

    p = sub.add_parser("empirical", help="tabulate D_m - D^n_m over sampled Dirichlet point sets")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--n-grid", type=_positive, default=4096)
    p.add_argument("--samples", type=_positive, default=1000, help="largest sample count (powers of ten up to it)")
    p.add_argument("--grids", type=_positive, default=500)
    _add_seed(p)
    _add_out(p)

    p = sub.add_parser("joint", help="record maximizers, D_m and terminal values per replica")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--n-grid", type=_positive, default=4096)
    p.add_argument("--replicas", type=_positive, default=2000)
    _add_seed(p)
    _add_out(p)

    p = sub.add_parser("density", help="evaluate the joint maximizer density f_m")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--theta", required=True, help="comma-separated interior points")

    p = sub.add_parser("beta-cdf", help="regularized incomplete beta I_x(a, b)")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--x", type=float, required=True)

    p = sub.add_parser("dump-paths", help="write one simulated grid as CSV")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--stream", type=_u64, default=0)
    p.add_argument("--out", required=True, help="CSV file")
    _add_seed(p)
    return parser


def _resolve_seed(args) -> int:
    if getattr(args, "fresh_seed", False):
        args.seed = secrets.randbits(64)
    return args.seed


def _resolve_out(parser, args) -> Path:
    out = args.out or os.environ.get(OUT_ENV)
    if not out:
        parser.error(f"--out is required (or set ${OUT_ENV})")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _print_reports(reports) -> None:
    for r in reports:
        print(r.line())


def cmd_maximize(parser, args) -> int:
    seed = _resolve_seed(args)
    grid = simulate(args.m, args.n, rng.stream_for(seed, args.stream))
    res = maximize(grid)
    payload = {
        "m": args.m,
        "n": args.n,
        "seed": seed,
        "stream": args.stream,
        "value": res.value,
        "theta": list(res.theta),
        "gaps": list(res.gaps),
    }
    if args.dump:
        payload["paths"] = grid.values.tolist()
    print(json.dumps(payload))
    return 0


def cmd_verify(parser, args) -> int:
    if args.m < 2:
        parser.error("verify needs --m >= 2")
    seed = _resolve_seed(args)
    config = CampaignConfig(args.m, args.n_grid, args.replicas, args.alpha, seed)
    try:
        config.validate()
    except ValueError as exc:
        parser.error(str(exc))
    out = _resolve_out(parser, args)
    started = datetime.now(timezone.utc)

    samples = run_theta_campaign(config, workers=args.workers)
    replicas = range(samples.n_replicas)
    m = config.m
    write_csv(out / "thetas.csv", ["replica"] + [f"theta_{i}" for i in range(1, m)],
              ([r] + [float(x) for x in row] for r, row in zip(replicas, samples.thetas)))
    write_csv(out / "gaps.csv", ["replica"] + [f"gap_{i}" for i in range(1, m + 1)],
              ([r] + [float(x) for x in row] for r, row in zip(replicas, samples.gaps)))
    write_csv(out / "d_values.csv", ["replica", "d_value"],
              ([r, float(v)] for r, v in zip(replicas, samples.d_values)))

    reports = verification_reports(config, samples, workers=args.workers, refine=args.refine)
    write_json(out / "reports.json", [r.to_dict() for r in reports])
    manifest_config = config.to_dict() | {"workers": args.workers, "refine": args.refine}
    write_manifest(out, "verify", manifest_config, seed, started)
    _print_reports(reports)
    return 0 if all(r.passed for r in reports) else 1


def cmd_gue(parser, args) -> int:
    seed = _resolve_seed(args)
    values = sample_lambda_max(args.m, args.count, rng.stream_for(seed, 0, rng.NS_GUE))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, ["lambda_max"], ([float(v)] for v in values))
    return 0


def cmd_empirical(parser, args) -> int:
    if args.m < 2:
        parser.error("empirical needs --m >= 2")
    seed = _resolve_seed(args)
    out = _resolve_out(parser, args)
    started = datetime.now(timezone.utc)
    counts = [10**k for k in range(len(str(args.samples))) if 10**k <= args.samples]
    if counts[-1] != args.samples:
        counts.append(args.samples)
    rows, violations = empirical_dn_table(args.m, args.n_grid, args.grids, counts, seed)
    header = ["sample_count", "mean_d_m", "mean_d_n_m", "mean_gap", "se_gap"]
    write_csv(out / "dn_table.csv", header, ([row[h] for h in header] for row in rows))
    gaps = [row["mean_gap"] for row in rows]
    decreasing = all(a > b for a, b in zip(gaps[:-1], gaps[1:]))
    checks = {"d_n_m_above_d_m": violations, "mean_gap_strictly_decreasing": decreasing}
    write_json(out / "checks.json", checks)
    write_manifest(out, "empirical",
                   {"m": args.m, "n_grid": args.n_grid, "samples": args.samples, "grids": args.grids}, seed, started)
    for row in rows:
        print(f"{row['sample_count']:>8d}  mean gap {row['mean_gap']:.6f} (se {row['se_gap']:.6f})")
    return 0 if violations == 0 and decreasing else 1


def cmd_joint(parser, args) -> int:
    seed = _resolve_seed(args)
    out = _resolve_out(parser, args)
    started = datetime.now(timezone.utc)
    m = args.m
    records = joint_campaign(m, args.n_grid, args.replicas, seed)
    header = (["replica"] + [f"theta_{i}" for i in range(1, m)] + ["d_value"]
              + [f"terminal_{i}" for i in range(1, m + 1)])
    write_csv(out / "joint.csv", header,
              ([r] + list(rec.theta) + [rec.d_value] + list(rec.terminal_values) for r, rec in enumerate(records)))
    write_manifest(out, "joint", {"m": m, "n_grid": args.n_grid, "replicas": args.replicas}, seed, started)
    return 0


def cmd_density(parser, args) -> int:
    try:
        theta = [float(t) for t in args.theta.split(",") if t.strip()]
    except ValueError:
        parser.error(f"--theta must be comma-separated numbers, got {args.theta!r}")
    if len(theta) != args.m - 1:
        parser.error(f"--theta needs {args.m - 1} values for m={args.m}")
    try:
        print(fmt(f_m_density(theta)))
    except ValueError as exc:
        parser.error(str(exc))
    return 0


def cmd_beta_cdf(parser, args) -> int:
    try:
        print(fmt(beta_cdf(BetaSpec(args.a, args.b), args.x)))
    except ValueError as exc:
        parser.error(str(exc))
    return 0


def cmd_dump_paths(parser, args) -> int:
    seed = _resolve_seed(args)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    dump_csv(simulate(args.m, args.n, rng.stream_for(seed, args.stream)), out)
    return 0


COMMANDS = {
    "maximize": cmd_maximize,
    "verify": cmd_verify,
    "gue": cmd_gue,
    "empirical": cmd_empirical,
    "joint": cmd_joint,
    "density": cmd_density,
    "beta-cdf": cmd_beta_cdf,
    "dump-paths": cmd_dump_paths,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](parser, args)
    except SystemExit as exc:
        return int(exc.code or 0)


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

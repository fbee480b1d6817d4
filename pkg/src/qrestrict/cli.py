"""Command-line entry point for the experiment harness.

Subcommands: algebra, annulus, endpoint, table, tomas-stein, all.
Exit code is 0 iff every enabled check passes.
"""

from __future__ import annotations

import argparse
import sys
import time

import scipy.fft as sfft

from . import harness


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrestrict",
        description="operator-algebra restriction experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("algebra", "annulus", "endpoint", "table", "tomas-stein",
                 "all"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat KEY=VALUE config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--n", type=int, help="matrix truncation size")
        sp.add_argument("--grid-n", type=int, help="default grid points")
        sp.add_argument("--grid-L", type=float, help="default grid half-width")
        sp.add_argument("--theta", help="comma-separated theta values")
        sp.add_argument("--deltas", help="comma-separated delta values")
        sp.add_argument("--threads", type=int,
                        help="worker threads for transforms")
    return parser


def _config_from_args(args) -> harness.ExperimentConfig:
    if args.config:
        cfg = harness.ExperimentConfig.from_file(args.config)
    else:
        cfg = harness.ExperimentConfig()
    over = {"name": args.command}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.out:
        over["out_dir"] = args.out
    if args.format:
        over["format"] = args.format
    if args.n is not None:
        over["N"] = args.n
    if args.grid_n is not None:
        over["grid_n"] = args.grid_n
    if args.grid_L is not None:
        over["grid_L"] = args.grid_L
    if args.theta:
        over["thetas"] = tuple(float(t) for t in args.theta.split(","))
    if args.deltas:
        over["deltas"] = tuple(float(d) for d in args.deltas.split(","))
    if args.threads is not None:
        over["threads"] = args.threads
    return cfg.replace(**over)


_RUNNERS = {
    "algebra": lambda cfg: {"algebra": harness.run_algebra_suite(cfg)},
    "annulus": lambda cfg: {"annulus": harness.run_annulus_scaling(cfg)[1]},
    "endpoint": lambda cfg: {"endpoint": harness.run_endpoint_scaling(cfg)[1]},
    "table": lambda cfg: {
        "table": harness.run_full_restriction_table(cfg)[1]},
    "tomas-stein": lambda cfg: {
        "tomas-stein": harness.run_tomas_stein_components(cfg)},
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    cfg = _config_from_args(args)
    t0 = time.perf_counter()
    with sfft.set_workers(max(cfg.threads, 1)):
        if args.command == "all":
            results, ok, meta = harness.run_all(cfg)
        else:
            results = _RUNNERS[args.command](cfg)
            ok = all(r["passed"] for rows in results.values() for r in rows)
            meta = {"runtime": time.perf_counter() - t0}
    paths = harness.emit_report(results, cfg, meta=meta)
    n_rows = sum(len(rows) for rows in results.values())
    n_fail = sum(1 for rows in results.values() for r in rows
                 if not r["passed"])
    for path in paths:
        print(f"wrote {path}")
    print(f"{n_rows} rows, {n_fail} failing checks")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands:

* ``simulate`` -- one (unraveling, gamma, h_f, L) ensemble -> CSV files
* ``sweep``    -- grid of ensembles from a JSON config -> phase diagram
* ``oracle``   -- dense cross-check suite on small chains
* ``validate`` -- fast invariant suite, one pass/fail line per property
* ``version``  -- print the package version

Exit codes: 0 success, 1 runtime or check failure, 2 configuration error.
``UNRAVEL_THREADS`` caps worker processes when ``--threads`` is not given.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__, checks, pipeline
from .errors import ConfigurationError, UnravelError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unravel", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one trajectory ensemble")
    sim.add_argument("--unraveling", required=True, choices=["qsd", "qj", "nh"])
    sim.add_argument("--L", required=True, type=int, help="chain length (even)")
    sim.add_argument("--hf", required=True, type=float, help="post-quench transverse field")
    sim.add_argument("--gamma", required=True, type=float, help="measurement rate")
    sim.add_argument("--alpha", type=float, help="jump-operator strength (qj/nh)")
    sim.add_argument("--J", type=float, default=1.0, help="spin coupling (default 1)")
    sim.add_argument("--n-traj", type=int, default=100, help="trajectories (default 100)")
    sim.add_argument("--t-max", type=float, default=120.0, help="horizon (default 120)")
    sim.add_argument("--t-star", type=float, help="transient cutoff (default 60, nh: 160)")
    sim.add_argument("--dt", type=float, help="time step (default 0.05; qj: 1/(8 L gamma alpha))")
    sim.add_argument("--record-every", type=int, help="recording stride in steps")
    sim.add_argument("--ell", type=int, help="subsystem size (default L/4)")
    sim.add_argument("--seed", type=int, default=0, help="master seed")
    sim.add_argument("--record-corr", action="store_true", help="record correlation profiles")
    sim.add_argument("--out", default="unravel_out", help="output directory")
    sim.add_argument("--threads", type=int, help="worker processes")

    swp = sub.add_parser("sweep", help="run a parameter grid from a JSON config")
    swp.add_argument("--config", required=True, help="JSON file with the sweep grid")
    swp.add_argument("--out", help="output directory (overrides config)")
    swp.add_argument("--threads", type=int)
    swp.add_argument("--no-resume", action="store_true", help="recompute completed cells")

    orc = sub.add_parser("oracle", help="dense reference cross-checks")
    orc_sub = orc.add_subparsers(dest="oracle_command", required=True)
    cross = orc_sub.add_parser("crosscheck", help="replay the dense equivalence suite")
    cross.add_argument("--L", type=int, default=4, help="chain length for the ensemble check")
    cross.add_argument("--n-traj", type=int, default=400)
    cross.add_argument("--seed", type=int, default=11)

    val = sub.add_parser("validate", help="fast invariant suite")
    val.add_argument("--quick", action="store_true", help="subset that finishes in seconds")

    sub.add_parser("version", help="print version")
    return parser


def _print_results(results) -> int:
    failures = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        print(f"{status} {name}: {detail}")
        failures += 0 if ok else 1
    return failures


def _cmd_simulate(args) -> int:
    config = {
        "unraveling": args.unraveling,
        "L": args.L,
        "hf": args.hf,
        "gamma": args.gamma,
        "alpha": args.alpha,
        "J": args.J,
        "n_traj": args.n_traj,
        "t_max": args.t_max,
        "t_star": args.t_star,
        "dt": args.dt,
        "record_every": args.record_every,
        "ell": args.ell or max(1, args.L // 4),
        "seed": args.seed,
        "record_corr": args.record_corr,
    }
    workers = pipeline.resolve_workers(args.threads)
    out = pipeline.simulate(config, args.out, workers=workers)
    print(f"wrote {out / 'timeseries.csv'}")
    print(f"wrote {out / 'asymptotic.csv'}")
    return 0


def _cmd_sweep(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        config = json.load(fh)
    out_dir = args.out or config.get("out")
    if not out_dir:
        raise ConfigurationError("sweep needs an output directory (--out or config key 'out')")
    config.pop("out", None)
    workers = pipeline.resolve_workers(args.threads)
    out = pipeline.sweep(config, out_dir, workers=workers, resume=not args.no_resume)
    print(f"wrote {out / 'sweep_asymptotic.csv'}")
    return 0


def _cmd_oracle(args) -> int:
    failures = _print_results(checks.run_oracle_suite(L=args.L, n_traj=args.n_traj, seed=args.seed))
    return 1 if failures else 0


def _cmd_validate(args) -> int:
    failures = _print_results(checks.run_fast_suite(quick=args.quick))
    return 1 if failures else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "version":
            print(f"unravel {__version__}")
            return 0
        raise ConfigurationError(f"unknown command {args.command!r}")
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except UnravelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

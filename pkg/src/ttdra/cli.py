"""Command-line entry point: ``ttdra {solve,bench,project,oracle}``.

Machine-readable output goes to stdout, diagnostics to stderr.  Verbosity is
set by ``TTDRA_LOG`` (error, info or debug).

Exit codes: 0 success, 2 malformed or missing input, 3 solver failure or timeout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import bench
from .errors import (
    MalformedInstance,
    MalformedSolution,
    TooLargeForOracle,
    TTDRAError,
)
from .instance import read_instance, write_result
from .oracle import brute_force
from .projection import DEFAULT_TOL, project_ds
from .relaxation import build_relaxed, solve_relaxation
from .solver import SolverConfig, solve

log = logging.getLogger("ttdra")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3


def _setup_logging():
    level = os.environ.get("TTDRA_LOG", "error").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")


def _config(args) -> SolverConfig:
    return SolverConfig(
        sigma=args.sigma,
        epsilon=args.epsilon,
        eta=args.eta,
        proj_tol=args.proj_tol,
        fold_cross_terms=args.fold_cross_terms,
        spectral_strategy=args.spectral,
        max_wall_time=args.time_limit,
    )


def _add_solver_options(p):
    p.add_argument("--sigma", type=float, default=1e6)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--eta", type=int, default=100)
    p.add_argument("--proj-tol", type=float, default=1e-9)
    p.add_argument("--fold-cross-terms", action="store_true")
    p.add_argument("--spectral", choices=["auto", "dense", "iterative"], default="auto")
    p.add_argument("--time-limit", type=float, default=None, metavar="SECS")


def cmd_solve(args) -> int:
    try:
        inst = read_instance(args.instance)
        config = _config(args)
    except (OSError, MalformedInstance, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    try:
        rp = build_relaxed(inst, config.sigma, config.spectral_strategy)
        lower = None
        if args.bound:
            lower = solve_relaxation(rp, proj_tol=config.proj_tol).bound
        result = solve(inst, config, relaxed=rp)
        result.lower_bound = lower
    except TTDRAError as err:
        print(f"solver error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_SOLVER
    sys.stdout.write(write_result(result, args.output))
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        paths = bench.discover(Path(args.dir), args.max_n)
        config = _config(args)
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    if not paths:
        print(f"error: no *.dat instances found in {args.dir}", file=sys.stderr)
        return EXIT_INPUT
    try:
        records = bench.run_bench(paths, Path(args.sln_dir) if args.sln_dir else None, config,
                                  repeat=args.repeat, seed=args.seed, jobs=args.jobs)
    except (MalformedInstance, MalformedSolution) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except TTDRAError as err:
        print(f"solver error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_SOLVER
    sys.stdout.write(bench.format_records(records, args.output))
    return EXIT_OK


def _read_matrix(path) -> np.ndarray:
    tokens = Path(path).read_text().split()
    if not tokens:
        raise ValueError("empty matrix file")
    n = int(tokens[0])
    if n < 1 or len(tokens) != 1 + n * n:
        raise ValueError(f"expected n followed by n*n entries, got {len(tokens)} tokens")
    return np.array([float(t) for t in tokens[1:]]).reshape(n, n)


def cmd_project(args) -> int:
    try:
        X = _read_matrix(args.matrix)
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    try:
        Y = project_ds(X, args.tol)
    except TTDRAError as err:
        print(f"projection error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    out = {"n": X.shape[0], "matrix": Y.data.tolist(), "sweeps": Y.sweeps, "violation": Y.violation}
    print(json.dumps(out))
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        inst = read_instance(args.instance)
        res = brute_force(inst)
    except (OSError, MalformedInstance, TooLargeForOracle) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps({
        "instance": inst.name,
        "n": inst.n,
        "optimum": res.optimum,
        "argmin": [int(p) + 1 for p in res.argmin],
        "enumerated": res.enumerated,
    }))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ttdra", description="QAP solver by time-triggered dimension reduction")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one QAPLIB instance")
    p.add_argument("instance")
    _add_solver_options(p)
    p.add_argument("--bound", action="store_true", help="also report the relaxation lower bound")
    p.add_argument("--output", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="solve every *.dat in a directory")
    p.add_argument("dir")
    _add_solver_options(p)
    p.add_argument("--sln-dir", default=None)
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-n", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("project", help="project a matrix onto the doubly stochastic set")
    p.add_argument("matrix")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("oracle", help="brute-force optimum for n <= 10")
    p.add_argument("instance")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands construct observable pairs, test feasibility of noise points,
bracket joint measurability degrees, map regions and export the dimension
curves. Reports go to stdout as JSON (CSV opt-in for tabular commands);
wall time goes to stderr so repeated runs with identical flags produce
byte-identical stdout.

Exit codes: 0 success, 2 invalid input, 3 undecided verdict under --strict.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from ._kernels import active_backend
from .cloning import cloning_coefficient, cloning_joint_observable
from .constructions import (fourier_mub_pair, mub_jmd_analytic, number_povm,
                            phase_povm_binned, random_pair)
from .povm import (NoisePoint, joint_to_dict, noise_to_dict, povm_from_dict,
                   povm_to_dict, uniform_trivial, validate)
from .region import (curves_to_csv, default_jobs, dimension_curves,
                     region_boundary, region_to_csv)
from .solver import (FeasibilityProblem, SolverConfig, Verdict, certify_witness,
                     feasibility_test, jmd_bisection)

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_UNDECIDED = 3


class CliError(Exception):
    """Invalid input; maps to exit code 2."""


def _solver_config(args) -> SolverConfig:
    try:
        return SolverConfig(
            tol_feasible=args.tol_feasible,
            tol_infeasible=args.tol_infeasible,
            max_iters=args.max_iters,
            stall_window=args.stall_window,
            stall_factor=args.stall_factor,
        )
    except ValueError as exc:
        raise CliError(str(exc))


def _config_echo(cfg: SolverConfig) -> dict:
    return {
        "tol_feasible": cfg.tol_feasible,
        "tol_infeasible": cfg.tol_infeasible,
        "max_iters": cfg.max_iters,
        "stall_window": cfg.stall_window,
        "stall_factor": cfg.stall_factor,
        "cg_tol": cfg.cg_tol,
    }


def add_solver_flags(sub):
    sub.add_argument("--tol-feasible", type=float, default=1e-7,
                     help="residual below which a run tries to certify a witness")
    sub.add_argument("--tol-infeasible", type=float, default=1e-5,
                     help="stalled residual above which a run is called infeasible")
    sub.add_argument("--max-iters", type=int, default=50000)
    sub.add_argument("--stall-window", type=int, default=2000)
    sub.add_argument("--stall-factor", type=float, default=0.999)
    sub.add_argument("--fixed-noise", action="store_true",
                     help="fix the trivial observables to uniform instead of optimizing them")


def add_pair_flags(sub):
    sub.add_argument("--pair", choices=["mub", "number-phase", "random", "file"],
                     default="mub")
    sub.add_argument("--dim", type=int, default=2)
    sub.add_argument("--bins", type=int, default=8, help="phase bins for --pair number-phase")
    sub.add_argument("--outcomes", type=int, default=0,
                     help="outcomes per random POVM (default: dim)")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--file", type=str, default=None,
                     help="JSON file with {\"m1\": povm, \"m2\": povm} for --pair file")


def load_pair(args):
    if args.pair == "mub":
        pair = fourier_mub_pair(args.dim)
        return pair.povm_a, pair.povm_b, {"pair": "mub", "dim": args.dim}
    if args.pair == "number-phase":
        return (number_povm(args.dim), phase_povm_binned(args.dim, args.bins),
                {"pair": "number-phase", "dim": args.dim, "bins": args.bins})
    if args.pair == "random":
        outcomes = args.outcomes or args.dim
        m1, m2 = random_pair(args.dim, outcomes, args.seed)
        return m1, m2, {"pair": "random", "dim": args.dim,
                        "outcomes": outcomes, "seed": args.seed}
    if args.pair == "file":
        if not args.file:
            raise CliError("--pair file requires --file PATH")
        try:
            with open(args.file) as fh:
                payload = json.load(fh)
            m1 = povm_from_dict(payload["m1"])
            m2 = povm_from_dict(payload["m2"])
        except (OSError, KeyError, ValueError, TypeError) as exc:
            raise CliError(f"cannot load pair from {args.file}: {exc}")
        return m1, m2, {"pair": "file", "path": args.file}
    raise CliError(f"unknown pair kind {args.pair}")  # pragma: no cover


def emit(report: dict, started: float):
    print(json.dumps(report, indent=2))
    print(f"[incompat] {report['command']} finished in {time.monotonic() - started:.2f} s "
          f"(kernel={active_backend()})", file=sys.stderr)


def cmd_mub(args) -> int:
    started = time.monotonic()
    pair = fourier_mub_pair(args.dim)
    report = {
        "command": "mub",
        "args": {"dim": args.dim},
        "result": {
            "m1": povm_to_dict(pair.povm_a),
            "m2": povm_to_dict(pair.povm_b),
            "jmd_analytic": mub_jmd_analytic(args.dim),
        },
    }
    emit(report, started)
    return EXIT_OK


def cmd_random_pair(args) -> int:
    started = time.monotonic()
    outcomes = args.outcomes or args.dim
    m1, m2 = random_pair(args.dim, outcomes, args.seed)
    report = {
        "command": "random-pair",
        "args": {"dim": args.dim, "outcomes": outcomes, "seed": args.seed},
        "result": {"m1": povm_to_dict(m1), "m2": povm_to_dict(m2),
                   "valid": validate(m1).ok and validate(m2).ok},
    }
    emit(report, started)
    return EXIT_OK


def cmd_feasible(args) -> int:
    started = time.monotonic()
    m1, m2, pair_echo = load_pair(args)
    cfg = _solver_config(args)
    try:
        point = NoisePoint(args.lam, args.mu)
    except ValueError as exc:
        raise CliError(str(exc))
    problem = FeasibilityProblem(m1, m2, point, optimize_noise=not args.fixed_noise)
    res = feasibility_test(problem, cfg)
    report = {
        "command": "feasible",
        "args": {**pair_echo, "lambda": point.lam, "mu": point.mu,
                 "fixed_noise": args.fixed_noise, "strict": args.strict},
        "config": _config_echo(cfg),
        "result": {
            "status": res.status.value,
            "residual": res.residual,
            "iterations": res.iterations,
            "certified_witness": res.witness is not None,
        },
    }
    if args.witness_out and res.witness is not None:
        g, p, q = res.witness
        payload = {"joint": joint_to_dict(g), "noise1": noise_to_dict(p),
                   "noise2": noise_to_dict(q),
                   "problem": {**pair_echo, "lambda": point.lam, "mu": point.mu}}
        with open(args.witness_out, "w") as fh:
            json.dump(payload, fh, indent=2)
        report["result"]["witness_file"] = args.witness_out
    emit(report, started)
    if args.strict and res.status is Verdict.UNDECIDED:
        return EXIT_UNDECIDED
    return EXIT_OK


def cmd_jmd(args) -> int:
    started = time.monotonic()
    m1, m2, pair_echo = load_pair(args)
    cfg = _solver_config(args)
    bracket = jmd_bisection(m1, m2, cfg, tol=args.tol,
                            optimize_noise=not args.fixed_noise)
    report = {
        "command": "jmd",
        "args": {**pair_echo, "tol": args.tol, "fixed_noise": args.fixed_noise},
        "config": _config_echo(cfg),
        "result": {
            "certified_lower": bracket.certified_lower,
            "heuristic_upper": bracket.heuristic_upper,
            "width": bracket.width,
            "probes": [
                {"lambda": p.lam, "mu": p.mu, "status": p.status.value,
                 "residual": p.residual, "iterations": p.iterations}
                for p in bracket.probes
            ],
        },
    }
    emit(report, started)
    return EXIT_OK


def cmd_region(args) -> int:
    started = time.monotonic()
    m1, m2, pair_echo = load_pair(args)
    cfg = _solver_config(args)
    jobs = args.jobs if args.jobs else default_jobs()
    rows = region_boundary(m1, m2, mu_grid=args.grid, cfg=cfg, tol=args.tol,
                           optimize_noise=not args.fixed_noise, jobs=jobs)
    if args.format == "csv":
        sys.stdout.write(region_to_csv(rows))
        print(f"[incompat] region finished in {time.monotonic() - started:.2f} s "
              f"(kernel={active_backend()})", file=sys.stderr)
        return EXIT_OK
    report = {
        "command": "region",
        "args": {**pair_echo, "grid": args.grid, "tol": args.tol, "jobs": jobs},
        "config": _config_echo(cfg),
        "result": {"rows": [{"mu": r.mu, "lambda_lower": r.lambda_lower,
                             "lambda_upper": r.lambda_upper} for r in rows]},
    }
    emit(report, started)
    return EXIT_OK


def cmd_curves(args) -> int:
    started = time.monotonic()
    rows = dimension_curves(args.dmax)
    if args.format == "csv":
        sys.stdout.write(curves_to_csv(rows))
        print(f"[incompat] curves finished in {time.monotonic() - started:.2f} s",
              file=sys.stderr)
        return EXIT_OK
    report = {
        "command": "curves",
        "args": {"dmax": args.dmax},
        "result": {"rows": [{"d": r.d, "eq2": r.eq2, "cloning": r.cloning} for r in rows]},
    }
    emit(report, started)
    return EXIT_OK


def cmd_cloning_bound(args) -> int:
    started = time.monotonic()
    coeff = cloning_coefficient(args.dim)
    report = {
        "command": "cloning-bound",
        "args": {"dim": args.dim, "verify": args.verify},
        "result": {"cloning_coefficient": coeff},
    }
    if args.verify:
        cfg = _solver_config(args)
        report["config"] = _config_echo(cfg)
        checks = []
        outcomes = args.outcomes or args.dim
        for i in range(args.pairs):
            m1, m2 = random_pair(args.dim, outcomes, args.seed + i)
            joint = cloning_joint_observable(m1, m2)
            # margins must reproduce the noisy observables exactly
            eye = np.eye(args.dim, dtype=complex)
            t1 = uniform_trivial(m1).weights
            t2 = uniform_trivial(m2).weights
            row_dev = np.abs(joint.effects.sum(axis=1)
                             - coeff * m1.effects
                             - (1 - coeff) * t1[:, None, None] * eye).max()
            col_dev = np.abs(joint.effects.sum(axis=0)
                             - coeff * m2.effects
                             - (1 - coeff) * t2[:, None, None] * eye).max()
            point = NoisePoint(coeff, coeff)
            prob = FeasibilityProblem(m1, m2, point)
            res = feasibility_test(prob, cfg)
            cert = certify_witness(joint, uniform_trivial(m1), uniform_trivial(m2), prob)
            checks.append({
                "seed": args.seed + i,
                "margin_deviation": float(max(row_dev, col_dev)),
                "witness_certified": cert,
                "solver_status": res.status.value,
            })
        report["result"]["checks"] = checks
        report["result"]["all_margins_ok"] = all(c["margin_deviation"] <= 1e-10 for c in checks)
        report["result"]["never_infeasible"] = all(
            c["solver_status"] != Verdict.INFEASIBLE.value for c in checks)
    emit(report, started)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="incompat",
        description="Joint measurability of noisy quantum observables.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sub = subs.add_parser("mub", help="construct the Fourier-conjugate basis pair")
    sub.add_argument("--dim", type=int, default=2)
    sub.set_defaults(func=cmd_mub)

    sub = subs.add_parser("random-pair", help="draw a seeded random POVM pair")
    sub.add_argument("--dim", type=int, default=2)
    sub.add_argument("--outcomes", type=int, default=0)
    sub.add_argument("--seed", type=int, default=0)
    sub.set_defaults(func=cmd_random_pair)

    sub = subs.add_parser("feasible", help="decide one noise point (lambda, mu)")
    add_pair_flags(sub)
    add_solver_flags(sub)
    sub.add_argument("--lambda", type=float, required=True, dest="lam")
    sub.add_argument("--mu", type=float, required=True)
    sub.add_argument("--strict", action="store_true",
                     help="exit with code 3 when the verdict is undecided")
    sub.add_argument("--witness-out", type=str, default=None,
                     help="write the certified witness to this JSON file")
    sub.set_defaults(func=cmd_feasible)

    sub = subs.add_parser("jmd", help="bracket the joint measurability degree")
    add_pair_flags(sub)
    add_solver_flags(sub)
    sub.add_argument("--tol", type=float, default=1e-3, help="target bracket width")
    sub.set_defaults(func=cmd_jmd)

    sub = subs.add_parser("region", help="bracket the region boundary per mu slice")
    add_pair_flags(sub)
    add_solver_flags(sub)
    sub.add_argument("--grid", type=int, default=21, help="number of mu slices")
    sub.add_argument("--tol", type=float, default=5e-3)
    sub.add_argument("--jobs", type=int, default=0,
                     help="worker processes (default: INCOMPAT_JOBS or cpu count)")
    sub.add_argument("--format", choices=["json", "csv"], default="json")
    sub.set_defaults(func=cmd_region)

    sub = subs.add_parser("curves", help="export the two dimension-dependence curves")
    sub.add_argument("--dmax", type=int, default=100)
    sub.add_argument("--format", choices=["json", "csv"], default="json")
    sub.set_defaults(func=cmd_curves)

    sub = subs.add_parser("cloning-bound",
                          help="cloning coefficient; --verify builds and checks witnesses")
    sub.add_argument("--dim", type=int, default=2)
    sub.add_argument("--verify", action="store_true")
    sub.add_argument("--pairs", type=int, default=10, help="random pairs to verify")
    sub.add_argument("--outcomes", type=int, default=0)
    sub.add_argument("--seed", type=int, default=0)
    add_solver_flags(sub)
    sub.set_defaults(func=cmd_cloning_bound)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors already; normalize others
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())

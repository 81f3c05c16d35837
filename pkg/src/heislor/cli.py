"""Command-line front end: trajectories, verification reports, reachability
verdicts and plans, and Lorentzian distances as deterministic CSV/JSON.

All floating output uses 17 significant digits and fixed key order, so a
repeated invocation with the same flags and seed is byte-identical.
Wall-clock timing is logged to stderr only, never into the report body.
Exit codes: 0 success (data verdicts like "undefined" or a failed budget
are still success), 2 usage/validation error, 3 internal numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from typing import Optional, Sequence

from . import __version__
from .bvp import DistanceVerdict, lorentz_distance, shoot_p2
from .discrepancies import entry_ids_for, ledger_jsonable
from .extremals import ExtremalKind, ExtremalSpec, sample_extremal
from .group import GroupPoint, Problem
from .jsonio import CSV_HEADER, dumps, trajectory_rows, trajectory_to_csv
from .reachability import (
    Verdict,
    closed_timelike_loop_p1,
    membership_p2,
    plan_reach_p1,
)
from .verification import DEVIATION_BUDGET, run_sweep

__all__ = ["main", "DOCUMENTED_EXAMPLES"]

# Example invocations documented in the README; the acceptance suite runs
# each twice and requires byte-identical stdout.
DOCUMENTED_EXAMPLES: tuple[tuple[str, ...], ...] = (
    ("extremal", "--problem", "2", "--case", "abnormal", "--params", "h2_0=0,h3=1",
     "--tmax", "1", "--samples", "11"),
    ("extremal", "--problem", "1", "--case", "normal", "--params", "theta0=0,a=0",
     "--tmax", "5", "--samples", "2"),
    ("extremal", "--problem", "1", "--case", "abnormal", "--params", "theta0=0",
     "--tmax", "6.283185307179586", "--samples", "25", "--format", "json"),
    ("verify", "--problem", "2", "--case", "normal", "--sweeps", "50",
     "--step", "1e-4", "--seed", "7"),
    ("verify", "--problem", "1", "--case", "abnormal", "--sweeps", "10",
     "--step", "1e-3", "--seed", "3"),
    ("verify", "--problem", "2", "--case", "normal", "--sweeps", "5",
     "--step", "0.1", "--seed", "1"),
    ("reach", "--problem", "2", "--point", "1,0,0"),
    ("reach", "--problem", "2", "--point", "0,0,1"),
    ("reach", "--problem", "1", "--point", "0,0,-1", "--plan"),
    ("reach", "--problem", "1", "--loop-length", "10"),
    ("distance", "--problem", "2", "--point", "2,0,0"),
    ("distance", "--problem", "2", "--point", "1,2,0"),
    ("distance", "--problem", "1", "--point", "1,1,1"),
)


def _parse_point(text: str) -> GroupPoint:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"--point expects 'x,y,z', got {text!r}")
    try:
        x, y, z = (float(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"--point expects three floats, got {text!r}") from exc
    return GroupPoint(x, y, z)


def _parse_params(text: Optional[str]) -> dict[str, float]:
    if not text:
        return {}
    out: dict[str, float] = {}
    for item in text.split(","):
        if "=" not in item:
            raise ValueError(f"--params entries must look like key=value, got {item!r}")
        key, _, raw = item.partition("=")
        key = key.strip()
        try:
            out[key] = float(raw)
        except ValueError as exc:
            raise ValueError(f"--params value for {key!r} is not a float: {raw!r}") from exc
    return out


_PARAM_NAMES = {
    (Problem.P1, ExtremalKind.ABNORMAL): ("theta0",),
    (Problem.P1, ExtremalKind.NORMAL): ("theta0", "a"),
    (Problem.P2, ExtremalKind.ABNORMAL): ("h2_0", "h3"),
    (Problem.P2, ExtremalKind.NORMAL): ("h1_0", "h2_0", "h3"),
}


def _spec_from_cli(problem: Problem, kind: ExtremalKind, params: dict, t1: float) -> ExtremalSpec:
    allowed = _PARAM_NAMES[(problem, kind)]
    unknown = sorted(set(params) - set(allowed))
    if unknown:
        raise ValueError(
            f"unknown parameter(s) {unknown} for {problem.name} {kind.value}; "
            f"allowed: {list(allowed)}"
        )
    if problem is Problem.P2 and kind is ExtremalKind.NORMAL and "h1_0" not in params:
        missing = [n for n in ("h2_0", "h3") if n not in params]
        if missing:
            raise ValueError(f"missing required parameter(s) {missing}")
        return ExtremalSpec.p2_normal_from(params["h2_0"], params["h3"], t1)
    missing = [n for n in allowed if n not in params]
    if missing:
        raise ValueError(f"missing required parameter(s) {missing}")
    kwargs = {name: params[name] for name in allowed}
    return ExtremalSpec(problem=problem, kind=kind, t1=t1, **kwargs)


def _spec_jsonable(spec: ExtremalSpec) -> dict:
    return {
        "problem": spec.problem.value,
        "case": spec.kind.value,
        "t1": spec.t1,
        "params": spec.params_dict(),
    }


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_ledger(args) -> None:
    if getattr(args, "ledger", None):
        with open(args.ledger, "w", newline="\n") as fh:
            fh.write(dumps(ledger_jsonable()))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_extremal(args) -> str:
    problem = Problem(args.problem)
    kind = ExtremalKind(args.case)
    if not args.tmax > 0.0:
        raise ValueError("--tmax must be positive")
    if args.samples < 2:
        raise ValueError("--samples must be >= 2")
    spec = _spec_from_cli(problem, kind, _parse_params(args.params), args.tmax)
    traj = sample_extremal(spec, args.samples)
    if args.format == "csv":
        return trajectory_to_csv(traj)
    doc = {
        "schema": "heislor.trajectory/1",
        "problem": spec.problem.value,
        "case": spec.kind.value,
        "params": spec.params_dict(),
        "t1": spec.t1,
        "n_samples": args.samples,
        "columns": CSV_HEADER.split(","),
        "rows": trajectory_rows(traj),
    }
    return dumps(doc)


def _cmd_verify(args) -> str:
    problem = Problem(args.problem)
    kind = ExtremalKind(args.case)
    if args.sweeps < 1:
        raise ValueError("--sweeps must be >= 1")
    result = run_sweep(
        problem, kind, args.sweeps, args.step, args.seed, budget=args.budget
    )
    report = {
        "schema": "heislor.report/1",
        "command": "verify",
        "parameters": {
            "problem": problem.value,
            "case": kind.value,
            "sweeps": args.sweeps,
            "step": args.step,
            "seed": args.seed,
            "budget": args.budget,
        },
        "outputs": {
            "budget_pass": result.passed,
            "n_draws": result.n_sweeps,
        },
        "deviations": {
            "worst_state": result.worst_state_dev,
            "worst_covector": result.worst_covector_dev,
            "per_draw": list(result.draws),
        },
        "ledger_entries": list(result.ledger_ids),
    }
    print(f"[heislor] verify runtime_s={result.runtime_s:.3f}", file=sys.stderr)
    return dumps(report)


def _plan_doc(problem: Problem, target: GroupPoint, schedule) -> str:
    # local import: integration pulls in the compiled kernels
    from .oracle import IntegratorConfig, integrate_schedule, schedule_to_jsonable
    from .group import ORIGIN

    traj = integrate_schedule(problem, ORIGIN, schedule, IntegratorConfig(step=1e-3))
    end = traj.endpoint
    err = math.dist(end.as_tuple(), target.as_tuple())
    doc = {
        "schema": "heislor.plan/1",
        "problem": problem.value,
        "target": list(target.as_tuple()),
        "pieces": schedule_to_jsonable(schedule)["pieces"],
        "endpoint": list(end.as_tuple()),
        "endpoint_error": err,
        "length": traj.total_length,
        "ledger_entries": [],
    }
    return dumps(doc)


def _cmd_reach(args) -> str:
    problem = Problem(args.problem)
    if problem is Problem.P2:
        if args.point is None:
            raise ValueError("--point is required for --problem 2")
        if args.plan or args.loop_length is not None:
            raise ValueError("--plan/--loop-length apply to --problem 1 only")
        q = _parse_point(args.point)
        mem = membership_p2(q)
        report = {
            "schema": "heislor.report/1",
            "command": "reach",
            "parameters": {"problem": 2, "point": list(q.as_tuple())},
            "outputs": {
                "verdict": mem.verdict.value,
                "witness": mem.witness,
            },
            "deviations": None,
            "ledger_entries": ["attainable-set-negative-x"],
        }
        return dumps(report)
    if args.loop_length is not None:
        schedule = closed_timelike_loop_p1(args.loop_length)
        return _plan_doc(problem, GroupPoint(0.0, 0.0, 0.0), schedule)
    if args.point is None:
        raise ValueError("--point is required (or --loop-length for --problem 1)")
    q = _parse_point(args.point)
    if args.plan:
        return _plan_doc(problem, q, plan_reach_p1(q))
    report = {
        "schema": "heislor.report/1",
        "command": "reach",
        "parameters": {"problem": 1, "point": list(q.as_tuple())},
        "outputs": {
            "verdict": Verdict.INTERIOR.value,
            "witness": None,
            "note": "P1 is globally controllable; use --plan for a schedule",
        },
        "deviations": None,
        "ledger_entries": [],
    }
    return dumps(report)


def _cmd_distance(args) -> str:
    problem = Problem(args.problem)
    q = _parse_point(args.point)
    result = lorentz_distance(problem, q)
    outputs: dict = {"verdict": result.verdict.value}
    ledger: list[str] = []
    if result.verdict is DistanceVerdict.FINITE:
        outputs["distance"] = result.value
        outputs["maximizer"] = _spec_jsonable(result.spec)
        ledger = list(entry_ids_for(result.spec.problem, result.spec.kind))
        if args.verbose:
            shot = shoot_p2(q)
            outputs["iterations"] = shot.iterations
            outputs["endpoint_error"] = shot.endpoint_error
            outputs["distinct_t1"] = list(shot.distinct_t1)
    else:
        outputs["distance"] = None
        outputs["maximizer"] = None
    report = {
        "schema": "heislor.report/1",
        "command": "distance",
        "parameters": {
            "problem": problem.value,
            "point": list(q.as_tuple()),
            "verbose": bool(args.verbose),
        },
        "outputs": outputs,
        "deviations": None,
        "ledger_entries": ledger,
    }
    return dumps(report)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heislor",
        description="Lorentzian optimal control on the Heisenberg group.",
    )
    parser.add_argument("--version", action="version", version=f"heislor {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the result to PATH instead of stdout")
    common.add_argument("--ledger", help="also write the sign-convention ledger to PATH")

    p = sub.add_parser(
        "extremal", parents=[common],
        help="sample a closed-form extremal trajectory",
        description="Sample one extremal trajectory on a uniform time grid. "
        "Abnormal trajectories use the families' natural parametrizations, "
        "so the time parameter is not arc length (their Lorentzian length "
        "is identically zero).",
    )
    p.add_argument("--problem", type=int, choices=(1, 2), required=True)
    p.add_argument("--case", choices=("normal", "abnormal"), required=True)
    p.add_argument("--params", help="comma-separated key=value extremal parameters")
    p.add_argument("--tmax", type=float, required=True, help="duration t1 > 0")
    p.add_argument("--samples", type=int, required=True, help="number of samples >= 2")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_extremal)

    p = sub.add_parser(
        "verify", parents=[common],
        help="seeded closed-form vs RK4 sweep",
        description="Draw random extremals, integrate the canonical system "
        "with fixed-step RK4, and report the worst deviation from the "
        "closed forms against the budget.  A failed budget is data, not an "
        "error: the exit code stays 0.",
    )
    p.add_argument("--problem", type=int, choices=(1, 2), required=True)
    p.add_argument("--case", choices=("normal", "abnormal"), required=True)
    p.add_argument("--sweeps", type=int, default=50)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=float, default=DEVIATION_BUDGET)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser(
        "reach", parents=[common],
        help="attainable-set verdict (P2) or constructive plan (P1)",
    )
    p.add_argument("--problem", type=int, choices=(1, 2), required=True)
    p.add_argument("--point", help="target x,y,z (use --point=-1,2,3 for negatives)")
    p.add_argument("--plan", action="store_true", help="P1: emit a reaching schedule")
    p.add_argument(
        "--loop-length", type=float, default=None,
        help="P1: emit a closed schedule through the origin with length >= L",
    )
    p.set_defaults(func=_cmd_reach)

    p = sub.add_parser(
        "distance", parents=[common],
        help="Lorentzian distance from the origin",
    )
    p.add_argument("--problem", type=int, choices=(1, 2), required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_distance)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    started = time.perf_counter()
    try:
        text = args.func(args)
        _write_ledger(args)
    except ValueError as exc:
        print(f"heislor: error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ArithmeticError) as exc:
        print(f"heislor: error: {exc}", file=sys.stderr)
        return 3
    _emit(args, text)
    print(
        f"[heislor] wall_time_s={time.perf_counter() - started:.3f}",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

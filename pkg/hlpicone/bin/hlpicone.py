#!/usr/bin/env python3
"""
Verify Picone identities and Sturm comparison theorems on problem files.

Usage example:
    hlpicone solve --problem problems/sine.json --csv u.csv --out summary.json

    hlpicone verify --problem problems/p16_alpha2.json --identity 1.6 \
        --variant bracket_power=as_printed --mode int

    hlpicone compare --problem problems/c3_sturm.json --theorem c3 \
        --samples 32 --seed 1 --out report.json

    hlpicone eigen --problem problems/eigen_clamped.json --order 4 --csv u.csv

Exit codes: 0 success, 1 residual above threshold or counterexample found,
2 invalid input (schema, syntax, variant), 3 numerical failure (any
unclassified arithmetic error included), 4 theorem hypotheses violated.
"""
import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from hlpicone.config import (
    ParsedProblem,
    Settings,
    load_problem_file,
    merge_settings,
    parse_problem,
)
from hlpicone.errors import (
    DomainError,
    EmptyDomainError,
    ExprSyntaxError,
    HLPiconeError,
    NotFoundError,
    PreconditionError,
    ProblemFileError,
    SingularCoefficientError,
    StepSizeUnderflowError,
    UnknownIdentifierError,
    VariantError,
)
from hlpicone.hlode import integrate
from hlpicone.picone import (
    FLAG_VALUES,
    KIND_FLAGS,
    MODES,
    FunctionInput,
    IdentityCase,
    IdentityKind,
    parse_variant_args,
    resolve_variants,
    sweep_variants,
    verify,
)
from hlpicone.sturmlab import (
    Theorem,
    eigen_shoot_2nd,
    eigen_shoot_4th_clamped,
    manufacture_case,
    verify_conclusion,
)
from hlpicone.utils import dumps_report, setup_logger, write_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_HYPOTHESES = 4

INPUT_ERRORS = (
    ProblemFileError,
    ExprSyntaxError,
    UnknownIdentifierError,
    VariantError,
    PreconditionError,
    DomainError,
)
NUMERICAL_ERRORS = (
    StepSizeUnderflowError,
    SingularCoefficientError,
    NotFoundError,
    EmptyDomainError,
)
COMPARE_FLAGS = ("condition_power", "middle_term")


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--problem",
        type=Path,
        required=True,
        help="Path to the JSON problem file.",
    )

    parser.add_argument(
        "--out",
        type=Path,
        default=None,
        help="Where to write the JSON report (standard output if not given).",
    )

    parser.add_argument(
        "--csv",
        type=Path,
        default=None,
        help="Where to write plot-ready CSV data.",
    )

    parser.add_argument(
        "--rtol",
        type=float,
        default=None,
        help="Relative tolerance of the integrator (overrides the file).",
    )

    parser.add_argument(
        "--atol",
        type=float,
        default=None,
        help="Absolute tolerance of the integrator (overrides the file).",
    )

    parser.add_argument(
        "--log-level",
        type=str,
        default="warning",
        help="Logging level: debug, info, warning or error.",
    )


def get_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hlpicone",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    solve = subparsers.add_parser("solve", help="Integrate the problem from its initial states.")
    add_common_arguments(solve)
    solve.add_argument(
        "--grid",
        type=int,
        default=None,
        help="Number of uniform CSV rows over the interval.",
    )

    check = subparsers.add_parser("verify", help="Check an identity F' = R numerically.")
    add_common_arguments(check)
    check.add_argument(
        "--identity",
        type=str,
        required=True,
        help="Identity to verify: 1.3, 1.6, 2.3, 2.4 or 2.6.",
    )
    check.add_argument(
        "--mode",
        type=str,
        choices=MODES,
        default="both",
        help="Residual mode deciding the exit code.",
    )
    check.add_argument(
        "--variant",
        type=str,
        action="append",
        default=[],
        help="Transcription variant KEY=VALUE; may be repeated.",
    )
    check.add_argument(
        "--grid",
        type=int,
        default=None,
        help="Number of grid points of the residual check.",
    )
    check.add_argument(
        "--threshold",
        type=float,
        default=None,
        help="Pass threshold on the scaled residual.",
    )
    check.add_argument(
        "--sweep",
        action="store_true",
        help="Verify every combination of the identity's variant flags.",
    )

    compare = subparsers.add_parser("compare", help="Run a comparison-theorem harness.")
    add_common_arguments(compare)
    compare.add_argument(
        "--theorem",
        type=str,
        choices=("1", "2", "c3"),
        required=True,
        help="1 or 2 for the fourth-order comparisons, c3 for the three-equation second-order one.",
    )
    compare.add_argument(
        "--samples",
        type=int,
        default=None,
        help="Number of random comparison solutions.",
    )
    compare.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Seed of the sample generator.",
    )
    compare.add_argument(
        "--variant",
        type=str,
        action="append",
        default=[],
        help="condition_power=corrected|as_printed (--theorem 2 only).",
    )
    compare.add_argument(
        "--grid",
        dest="hypothesis_grid",
        type=int,
        default=None,
        help="Number of grid points for hypotheses and side conditions.",
    )
    compare.add_argument(
        "--num-workers",
        type=int,
        default=None,
        help="Threads for independent samples.",
    )
    compare.add_argument(
        "--dump-dir",
        type=Path,
        default=Path("counterexamples"),
        help="Directory receiving one CSV per counterexample.",
    )

    eigen = subparsers.add_parser("eigen", help="Smallest Dirichlet or clamped eigenvalue.")
    add_common_arguments(eigen)
    eigen.add_argument(
        "--order",
        type=int,
        choices=(2, 4),
        default=None,
        help="2: Dirichlet, 4: clamped (defaults to the file's order).",
    )

    return parser


def get_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    return get_parser().parse_args(argv)


def _settings(args: argparse.Namespace, parsed: ParsedProblem) -> Settings:
    names = [f.name for f in dataclasses.fields(Settings)]
    overrides = {k: v for k, v in vars(args).items() if k in names}
    return merge_settings(parsed.settings, overrides)


def _emit(report: Dict[str, Any], out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(dumps_report(report))
    else:
        write_report(report, out)


def _header(command: str, args: argparse.Namespace, parsed: ParsedProblem, settings: Settings) -> Dict[str, Any]:
    return {
        "command": command,
        "problem": str(args.problem),
        "order": parsed.order,
        "alpha": parsed.alpha,
        "interval": parsed.interval,
        "settings": dataclasses.asdict(settings),
    }


def _with_suffix(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}_{tag}{path.suffix}")


def cmd_solve(args: argparse.Namespace, parsed: ParsedProblem, settings: Settings) -> int:
    runs = []
    if parsed.order == "system":
        states = parsed.initial.get("systems") or []
        problems = parsed.system()
        if len(states) != len(problems):
            raise ProblemFileError(f"initial.systems needs {len(problems)} states, got {len(states)}")
        runs = [(f"u{k + 1}", p, s) for k, (p, s) in enumerate(zip(problems, states))]
    else:
        if parsed.initial.get("u") is None:
            raise ProblemFileError("solve needs initial.u")
        runs.append(("u", parsed.problem(), parsed.initial["u"]))
        if parsed.initial.get("v") is not None and parsed.has_second:
            runs.append(("v", parsed.second_problem(), parsed.initial["v"]))

    trajectories = []
    for k, (name, problem, state) in enumerate(runs):
        width = problem.interval[1] - problem.interval[0]
        traj = integrate(
            problem,
            state,
            rtol=settings.rtol,
            atol=settings.atol,
            max_step=width / settings.max_steps_per_span,
        )
        entry = {
            "name": name,
            "initial": traj.initial.tolist(),
            "final": traj.ys[-1].tolist(),
            "nodes": len(traj.xs),
            "step_stats": traj.stats,
            "csv": None,
        }
        if args.csv is not None:
            path = args.csv if k == 0 else _with_suffix(args.csv, name)
            traj.to_csv(path, np.linspace(traj.x0, traj.x1, settings.grid))
            entry["csv"] = str(path)
        trajectories.append(entry)

    report = _header("solve", args, parsed, settings)
    report["trajectories"] = trajectories
    _emit(report, args.out)
    return EXIT_OK


def _identity_variants(kind: IdentityKind, parsed: ParsedProblem, cli: Dict[str, str]) -> Dict[str, str]:
    """File variants the kind owns, then the command-line ones (checked strictly)."""
    variants = {k: v for k, v in parsed.variants.items() if k in KIND_FLAGS[kind]}
    variants.update(cli)
    return resolve_variants(kind, variants)


def _function(parsed: ParsedProblem, name: str) -> FunctionInput:
    if parsed.functions.get(name) is not None:
        return FunctionInput(expr=parsed.functions[name])
    if parsed.initial.get(name) is not None:
        return FunctionInput(initial=tuple(parsed.initial[name]))
    raise ProblemFileError(f"the identity needs functions.{name} or initial.{name}")


def cmd_verify(args: argparse.Namespace, parsed: ParsedProblem, settings: Settings) -> int:
    kind = IdentityKind.parse(args.identity)
    variants = _identity_variants(kind, parsed, parse_variant_args(args.variant))

    if kind is IdentityKind.P26:
        problems = parsed.system()
        states = parsed.initial.get("systems") or []
        if len(states) != len(problems):
            raise ProblemFileError(f"identity 2.6 needs {len(problems)} initial.systems states, got {len(states)}")
        inputs = [FunctionInput(initial=tuple(s)) for s in states]
    else:
        if parsed.order == "system":
            raise ProblemFileError(f"identity {kind.cli_name} needs a second or fourth order file")
        middle = variants.get("middle_term")
        problems = [parsed.problem(middle), parsed.second_problem(middle)]
        inputs = [_function(parsed, "u"), _function(parsed, "v")]

    case = IdentityCase(
        kind,
        problems,
        inputs,
        variants=variants,
        grid=settings.grid,
        delta_factor=settings.delta_factor,
        rtol=settings.rtol,
        atol=settings.atol,
        steps_per_span=settings.max_steps_per_span,
    )
    report = _header("verify", args, parsed, settings)
    report["mode"] = args.mode
    report["threshold"] = settings.threshold

    if args.sweep:
        result = sweep_variants(
            case,
            threshold=settings.threshold,
            mode=args.mode,
            int_threshold=settings.int_threshold,
            diff_threshold=settings.diff_threshold,
        )
        report["sweep"] = result
        _emit(report, args.out)
        return EXIT_OK if result.passing else EXIT_FAILED

    outcome = verify(case, int_threshold=settings.int_threshold, diff_threshold=settings.diff_threshold)
    if args.csv is not None:
        outcome.write_samples_csv(args.csv)
    passed = outcome.passes(settings.threshold, args.mode)
    report["passed"] = passed
    report["report"] = outcome
    _emit(report, args.out)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_compare(args: argparse.Namespace, parsed: ParsedProblem, settings: Settings) -> int:
    theorem = Theorem.parse(args.theorem)
    cli = parse_variant_args(args.variant)
    for flag, value in cli.items():
        if flag not in COMPARE_FLAGS:
            raise VariantError(f"compare accepts {', '.join(COMPARE_FLAGS)}, got {flag!r}")
        if value not in FLAG_VALUES[flag]:
            raise VariantError(f"flag {flag!r} takes one of {', '.join(FLAG_VALUES[flag])}, got {value!r}")
    variants = dict(parsed.variants)
    variants.update(cli)

    if theorem is Theorem.C3:
        problems = parsed.system()
    else:
        if parsed.order != "fourth":
            raise ProblemFileError(f"theorem {args.theorem} needs a fourth order file, got {parsed.order!r}")
        middle = variants.get("middle_term")
        problems = [parsed.problem(middle), parsed.second_problem(middle)]

    case = manufacture_case(
        theorem,
        problems,
        shift_comparison=settings.shift_comparison,
        samples=settings.samples,
        seed=settings.seed,
        proportional_samples=settings.proportional_samples,
        extra_states=parsed.initial.get("samples") or [],
        grid=settings.hypothesis_grid,
        zero_tol=settings.zero_tol,
        condition_power=variants.get("condition_power", "corrected"),
        rtol=settings.rtol,
        atol=settings.atol,
        steps_per_span=settings.max_steps_per_span,
        num_workers=settings.num_workers,
    )
    outcome = verify_conclusion(case, dump_dir=args.dump_dir)
    if args.csv is not None:
        case.solution.to_csv(args.csv, case.grid_points())

    report = _header("compare", args, parsed, settings)
    report["report"] = outcome
    _emit(report, args.out)
    if not outcome.hypotheses.holds:
        return EXIT_HYPOTHESES
    return EXIT_FAILED if outcome.counterexamples else EXIT_OK


def cmd_eigen(args: argparse.Namespace, parsed: ParsedProblem, settings: Settings) -> int:
    file_order = {"second": 2, "fourth": 4}.get(parsed.order)
    order = args.order or file_order
    if order is None or order != file_order:
        raise ProblemFileError(f"--order {args.order} does not match a {parsed.order} order file")

    kw = dict(rtol=settings.rtol, atol=settings.atol, steps_per_span=settings.max_steps_per_span)
    problem = parsed.problem()
    if order == 2:
        result = eigen_shoot_2nd(problem.p, problem.q, problem.alpha, problem.interval, **kw)
    else:
        result = eigen_shoot_4th_clamped(
            problem.a,
            problem.b,
            problem.alpha,
            problem.interval,
            c0=problem.c,
            middle_term=problem.middle_term,
            **kw,
        )
    print(format(result.eigenvalue, ".17g"))
    if args.csv is not None:
        traj = result.trajectory
        traj.to_csv(args.csv, np.linspace(traj.x0, traj.x1, settings.grid))
    if args.out is not None:
        report = _header("eigen", args, parsed, settings)
        report["mode"] = "dirichlet" if order == 2 else "clamped"
        report["result"] = result
        write_report(report, args.out)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "compare": cmd_compare,
    "eigen": cmd_eigen,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = get_args(argv)
    try:
        setup_logger(args.log_level)
    except ValueError as e:
        print(f"hlpicone: error: {e}", file=sys.stderr)
        return EXIT_INPUT

    try:
        parsed = parse_problem(load_problem_file(args.problem))
        settings = _settings(args, parsed)
        logger.info(f"{args.command} {args.problem}")
        return COMMANDS[args.command](args, parsed, settings)
    except INPUT_ERRORS as e:
        print(f"hlpicone: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except NUMERICAL_ERRORS as e:
        print(f"hlpicone: error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (HLPiconeError, OSError) as e:
        print(f"hlpicone: error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ArithmeticError, ValueError, RecursionError) as e:
        logger.debug("unclassified failure", exc_info=True)
        print(f"hlpicone: numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

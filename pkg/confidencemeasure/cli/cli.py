"""
Command-line front end.

    confidencemeasure combine evidence.json --output combined.csv [--tree EXPR] [--null THETA0]
    confidencemeasure pvalue evidence.json --null THETA0 --alternative {greater,less,two-sided}
    confidencemeasure ci evidence.json --level RHO --tails {central,lower,upper}
    confidencemeasure game --estimator {calibrated,shift:<v>,scale:<v>} --theta --gamma --n --reps --seed
    confidencemeasure example {torricelli,common-mean}

Reports are JSON on standard output. Exit codes: 0 success, 2 invalid input,
3 numerical failure.
"""

import argparse
import json
import sys
from collections.abc import Sequence
from enum import Enum
from typing import Any, Callable, Optional

from confidencemeasure import __version__
from confidencemeasure.cli.evidence import EvidenceFile, check_tree, parse_tree, resolve_tree
from confidencemeasure.cli.worked_examples import EXAMPLES, run_example
from confidencemeasure.combination.combination import CombinationResult, combine, combine_tree
from confidencemeasure.core.core import (
    Alternative,
    central_interval,
    dump_curve,
    p_value,
)
from confidencemeasure.elicitation.elicitation import AgentNoiseSpec
from confidencemeasure.game.game import EstimatorSpec, GameConfig, agent_noise_calibration, play
from confidencemeasure.logging.exceptions import (
    NUMERICAL_EXCEPTIONS,
    VALIDATION_EXCEPTIONS,
    DomainException,
)
from confidencemeasure.logging.logger import LOGGER, LogLevel
from confidencemeasure.models.models import NormalModelSpec

EXIT_OK: int = 0
EXIT_INVALID: int = 2
EXIT_NUMERICAL: int = 3


class Tails(str, Enum):
    CENTRAL = "central"
    LOWER = "lower"
    UPPER = "upper"

    def alphas(self, level: float) -> tuple[float, float]:
        """
        (alpha1, alpha2) of the interval (F^-1(alpha1), F^-1(1 - alpha2)] at `level`.
        """
        if self is Tails.CENTRAL:
            return (1.0 - level) / 2.0, (1.0 - level) / 2.0
        if self is Tails.LOWER:
            return 1.0 - level, 0.0
        return 0.0, 1.0 - level


def _emit(payload: Any) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _combined(args: argparse.Namespace) -> CombinationResult:
    evidence = EvidenceFile.load(args.input)
    curves = evidence.curves()
    if args.tree:
        tree = parse_tree(args.tree)
        check_tree(tree, evidence.source_ids)
        return combine_tree(resolve_tree(tree, curves))
    return combine(list(curves.values()))


def cmd_combine(args: argparse.Namespace) -> int:
    result = _combined(args)
    curve = result.curve
    dump_curve(curve, args.output)
    summary: dict[str, Any] = {
        "sources": result.source_count,
        "source_ids": list(result.source_ids),
        "provenance": {
            "id": curve.provenance.source_id,
            "kind": curve.provenance.kind.value,
            "approximate": curve.provenance.approximate,
        },
        "grid": {"min": curve.grid.lower, "max": curve.grid.upper, "points": len(curve.grid)},
        "median": curve.median(),
        "output": args.output,
    }
    if args.null is not None:
        summary["null"] = args.null
        summary["p_value"] = p_value(curve, args.null, Alternative.GREATER)
    _emit(summary)
    return EXIT_OK


def cmd_pvalue(args: argparse.Namespace) -> int:
    alternative = Alternative.parse(args.alternative)
    value = p_value(_combined(args).curve, args.null, alternative)
    _emit({"p_value": value, "null": args.null, "alternative": args.alternative})
    return EXIT_OK


def cmd_ci(args: argparse.Namespace) -> int:
    if not 0.0 < args.level < 1.0:
        raise DomainException("level", args.level, "(0, 1)")
    tails = Tails(args.tails)
    alpha1, alpha2 = tails.alphas(args.level)
    curve = _combined(args).curve
    interval = central_interval(curve, alpha1, alpha2)
    lower, upper = interval.intervals[0] if interval.intervals else (None, None)
    _emit(
        {
            "level": args.level,
            "tails": tails.value,
            "alpha1": alpha1,
            "alpha2": alpha2,
            "lower": lower,
            "upper": upper,
            "lower_is_support_edge": alpha1 == 0.0,
            "upper_is_support_edge": alpha2 == 0.0,
        }
    )
    return EXIT_OK


def cmd_game(args: argparse.Namespace) -> int:
    estimator = EstimatorSpec.parse(args.estimator)
    cfg = GameConfig(
        NormalModelSpec(args.theta, args.gamma, args.n),
        replicates=args.reps,
        seed=args.seed,
        workers=args.workers,
        exact_sets=args.exact_sets,
    )
    report = play(estimator, cfg).to_dict()
    if args.agent_noise is not None:
        noise = AgentNoiseSpec(args.agent_noise)
        report["agent_noise"] = {
            "noise_sd": noise.noise_sd,
            "ks_noise_aware": agent_noise_calibration(noise, cfg, noise_aware=True),
            "ks_noise_ignored": agent_noise_calibration(noise, cfg, noise_aware=False),
        }
    _emit(report)
    return EXIT_OK


def cmd_example(args: argparse.Namespace) -> int:
    _emit(run_example(args.name, draws=args.draws, seed=args.seed, dump_dir=args.dump_dir))
    return EXIT_OK


def _add_tree(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("input", help="Evidence file (JSON).")
    parser.add_argument("--tree", default=None, help="Grouping of source ids, e.g. '((y1,y2),(a1,a2))'.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confidencemeasure",
        description="Confidence-measure inference: combine evidence, extract p-values and intervals, play the "
        "betting game.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        choices=[level.name.lower() for level in LogLevel],
        default="warning",
        help="Level of messages written to standard error.",
    )
    parser.add_argument("--log-dir", default=None, help="Write a log file and the simulation trace to this directory.")
    commands = parser.add_subparsers(dest="command", required=True)

    combine_parser = commands.add_parser("combine", help="Combine the sources of an evidence file.")
    _add_tree(combine_parser)
    combine_parser.add_argument("--output", required=True, help="CSV file receiving the combined curve.")
    combine_parser.add_argument("--null", type=float, default=None, help="Also report F(null).")
    combine_parser.set_defaults(func=cmd_combine)

    pvalue_parser = commands.add_parser("pvalue", help="p-value of a point null hypothesis.")
    _add_tree(pvalue_parser)
    pvalue_parser.add_argument("--null", type=float, required=True)
    pvalue_parser.add_argument("--alternative", choices=["greater", "less", "two-sided"], default="two-sided")
    pvalue_parser.set_defaults(func=cmd_pvalue)

    ci_parser = commands.add_parser("ci", help="Confidence interval.")
    _add_tree(ci_parser)
    ci_parser.add_argument("--level", type=float, required=True)
    ci_parser.add_argument("--tails", choices=[tails.value for tails in Tails], default=Tails.CENTRAL.value)
    ci_parser.set_defaults(func=cmd_ci)

    game_parser = commands.add_parser("game", help="Play the betting game against an estimator.")
    game_parser.add_argument("--estimator", default="calibrated", help="calibrated, shift:<v> or scale:<v>.")
    game_parser.add_argument("--theta", type=float, default=1.0)
    game_parser.add_argument("--gamma", type=float, default=1.0)
    game_parser.add_argument("--n", type=int, default=3)
    game_parser.add_argument("--reps", type=int, default=10_000)
    game_parser.add_argument("--seed", type=int, default=0)
    game_parser.add_argument("--workers", type=int, default=1)
    game_parser.add_argument("--exact-sets", action="store_true", help="Build every curve and its set estimates.")
    game_parser.add_argument("--agent-noise", type=float, default=None, help="Also report agent-noise calibration.")
    game_parser.set_defaults(func=cmd_game)

    example_parser = commands.add_parser("example", help="Reproduce a worked example.")
    example_parser.add_argument("name", choices=EXAMPLES)
    example_parser.add_argument("--draws", type=int, default=1_000_000, help="Monte Carlo draws of the oracle.")
    example_parser.add_argument("--seed", type=int, default=0)
    example_parser.add_argument("--dump-dir", default=None, help="Directory receiving the curve dumps.")
    example_parser.set_defaults(func=cmd_example)
    return parser


def _fail(code: int, exc: BaseException) -> int:
    LOGGER.error(f"[cli] {type(exc).__name__}: {exc}")
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID

    LOGGER.set_stream_level(LogLevel[args.log_level.upper()])
    if args.log_dir is not None:
        LOGGER.set_log_path(args.log_dir)

    command: Callable[[argparse.Namespace], int] = args.func
    try:
        return command(args)
    except (*VALIDATION_EXCEPTIONS, OSError) as exc:
        return _fail(EXIT_INVALID, exc)
    except NUMERICAL_EXCEPTIONS as exc:
        return _fail(EXIT_NUMERICAL, exc)
    except Exception as exc:  # unexpected failures count as numerical
        return _fail(EXIT_NUMERICAL, exc)
    finally:
        LOGGER.close()


def run() -> None:
    sys.exit(main())

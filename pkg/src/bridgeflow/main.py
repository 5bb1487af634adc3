"""
Command line entry point for bridgeflow.

Exit codes: 0 on success, 1 on invalid input or configuration, 2 on a
numerical failure. Results go to stdout as one JSON document; logs go to stderr.
"""

import argparse
import importlib
import json
import sys
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError as PydanticValidationError

from . import __version__
from .config import BridgeflowSettings, load_settings
from .errors import BridgeflowError, InputError, NumericalError
from .log import debug_print, set_log_level

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2

_MODULES = {
    "gen": "gen",
    "cost": "cost",
    "ot": "ot",
    "train": "train",
    "predict": "predict",
    "eval": "evaluate",
}


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors become InputError so they share exit code 1 and the JSON payload."""

    def error(self, message: str):
        raise InputError(f"{self.prog}: {message}", {"usage": self.format_usage().strip()})


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="bridgeflow", description="Semi-supervised cross-domain alignment")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--threads", type=int, default=None, help="BLAS threads (default BRIDGEFLOW_THREADS)")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR or CRITICAL")
    parser.add_argument("--debug", action="store_true", help="Debug logging and solver self-checks")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    gen = sub.add_parser("gen", help="Write a synthetic dataset")
    gen.add_argument("--spec", required=True, help="SyntheticSpec JSON file")
    gen.add_argument("--out", required=True, help="Output directory")
    gen.add_argument("--format", choices=("brgf", "csv"), default="brgf")

    cost = sub.add_parser("cost", help="Build a fused inter-space cost")
    cost.add_argument("--x", required=True, help="Source features (.brgf or .csv)")
    cost.add_argument("--y", required=True, help="Target features (.brgf or .csv)")
    cost.add_argument("--pairs", default=None, help="Paired points CSV (source,target)")
    cost.add_argument("--kind", choices=("bridge", "knn", "kcca"), default="bridge")
    cost.add_argument("--out", required=True, help="Cost file (.bfcm or .csv)")
    cost.add_argument("--intra-metric", choices=("cosine", "sq_euclidean", "one_minus_pearson"), default="cosine")
    cost.add_argument("--knn-k", type=int, default=10)
    cost.add_argument("--knn-cross-weight", type=float, default=0.0)
    cost.add_argument("--kcca-bandwidth", type=float, default=None)
    cost.add_argument("--kcca-regularization", type=float, default=1e-3)
    cost.add_argument("--kcca-components", type=int, default=None)
    cost.add_argument("--cxx-out", default=None, help="Also write the source intra-space cost")
    cost.add_argument("--cyy-out", default=None, help="Also write the target intra-space cost")

    ot = sub.add_parser("ot", help="Solve an entropic coupling")
    ot.add_argument("--cost", default=None, help="Inter-space cost file")
    ot.add_argument("--cxx", default=None, help="Source intra-space cost file")
    ot.add_argument("--cyy", default=None, help="Target intra-space cost file")
    ot.add_argument("--solver", choices=("linear", "gw", "fgw"), default="linear")
    ot.add_argument("--epsilon", type=float, default=5e-3)
    ot.add_argument("--alpha", type=float, default=0.5)
    ot.add_argument("--tau-x", type=float, default=1.0)
    ot.add_argument("--tau-y", type=float, default=1.0)
    ot.add_argument("--max-iters", type=int, default=2000)
    ot.add_argument("--max-outer-iters", type=int, default=50)
    ot.add_argument("--tolerance", type=float, default=1e-6)
    ot.add_argument("--no-normalize", action="store_true", help="Use costs as stored, without mean normalization")
    ot.add_argument("--cost-power", type=float, default=2.0, help="Exponent applied to the inter-space cost (linear and fgw)")
    ot.add_argument("--out", required=True, help="Coupling file (.bfpi or .csv)")

    train = sub.add_parser("train", help="Run an experiment config")
    train.add_argument("--config", required=True, help="ExperimentConfig JSON file")
    train.add_argument("--out", required=True, help="Run directory")
    train.add_argument("--seed", type=int, default=None, help="Override the config seed")
    train.add_argument("--max-hours", type=float, default=None, help="Wall-clock training budget")

    predict = sub.add_parser("predict", help="Push source points through a trained field")
    predict.add_argument("--checkpoint", required=True)
    predict.add_argument("--x", required=True, help="Source features")
    predict.add_argument("--steps", type=int, default=100)
    predict.add_argument("--samples-per-input", type=int, default=1)
    predict.add_argument("--seed", type=int, default=0)
    predict.add_argument("--out", required=True, help="Predicted features (.brgf or .csv)")
    predict.add_argument("--dump-trajectory", default=None, help="CSV file for per-step ODE states")

    evaluate = sub.add_parser("eval", help="Compute a metric")
    evaluate.add_argument("--pred", required=True)
    evaluate.add_argument("--truth", default=None)
    evaluate.add_argument("--metric", choices=("decode", "overlap", "mse", "match"), required=True)
    evaluate.add_argument("--k", type=int, default=15, help="Neighbours for the overlap metric")
    evaluate.add_argument("--batch", type=int, default=None, help="Subsample size for the overlap metric")
    evaluate.add_argument("--samples", type=int, default=None, help="Monte Carlo draws for the match metric")
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.add_argument("--out", required=True, help="metrics.json path")
    return parser


def _report_error(code: str, message: str, details, exit_code: int) -> int:
    from .commands.common import build_error_result, emit

    debug_print(f"[ERROR] {message}")
    emit(build_error_result(code, message, details))
    return exit_code


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run one subcommand and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
        settings = load_settings()
    except BridgeflowError as exc:
        return _report_error(exc.code, exc.message, exc.details, EXIT_INVALID)
    except (ValueError, PydanticValidationError) as exc:
        return _report_error("invalid_config", str(exc), {}, EXIT_INVALID)

    threads = args.threads if args.threads is not None else settings.threads
    if threads < 1:
        return _report_error("invalid_arguments", "--threads must be >= 1", {"flag": "--threads"}, EXIT_INVALID)
    updates = {"threads": threads, "debug": settings.debug or args.debug}
    if args.log_level:
        updates["log_level"] = args.log_level.strip().upper()
    settings = settings.model_copy(update=updates)
    try:
        settings.validate_settings()
        set_log_level(settings.effective_log_level())
    except ValueError as exc:
        return _report_error("invalid_arguments", str(exc), {"flag": "--log-level"}, EXIT_INVALID)

    from .commands.common import build_success_result, configure_threads, emit, error_result_from

    configure_threads(settings.threads)
    debug_print(f"[DEBUG] {settings}")
    try:
        module = importlib.import_module(f".commands.{_MODULES[args.command]}", __package__)
        result = module.run(args, settings)
    except NumericalError as exc:
        debug_print(f"[ERROR] {exc.message}")
        emit(error_result_from(exc))
        return EXIT_NUMERICAL
    except BridgeflowError as exc:
        debug_print(f"[ERROR] {exc.message}")
        emit(error_result_from(exc))
        return EXIT_INVALID
    except PydanticValidationError as exc:
        details = {"errors": json.loads(exc.json(include_url=False))}
        return _report_error("invalid_config", f"{args.command}: {exc}", details, EXIT_INVALID)
    except FileNotFoundError as exc:
        return _report_error("file_not_found", str(exc), {"file": exc.filename}, EXIT_INVALID)
    emit(build_success_result(result))
    return EXIT_OK


def main() -> None:
    load_dotenv()
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        debug_print("\n[INFO] interrupted by user")
        sys.exit(130)


if __name__ == "__main__":
    main()

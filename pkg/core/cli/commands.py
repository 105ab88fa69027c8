# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from core import __version__ as ver
from core.exceptions import EXIT_OK, InvalidFlagsError, InvalidInputError, MatrixCompletionError
from core.managers.bench_manager import BenchManager, summarize
from core.managers.completion_manager import CompletionManager
from core.managers.holdout_manager import HoldoutManager
from core.models.configs import AUTO
from core.models.experiment import Algorithm, ExperimentSpec, SweepAxis, SweepRow
from core.services.config_service import ConfigService
from core.services.storage_service import StorageService
from core.utils.helpers import Helpers

logger = logging.getLogger(__name__)


class CliArgumentParser(argparse.ArgumentParser):
    """Flag errors raise instead of exiting, so they map onto the tool's exit codes."""

    def error(self, message):
        raise InvalidFlagsError(f"{self.prog}: {message}")


def _sigma0(value: str):
    if value.strip().lower() == AUTO:
        return AUTO
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or '{AUTO}', got '{value}'") from None
    if not number > 0:
        raise argparse.ArgumentTypeError(f"sigma0 must be positive, got {value}")
    return number


def _float_list(value: str) -> List[float]:
    try:
        items = [float(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{value}'") from None
    if not items:
        raise argparse.ArgumentTypeError("grid must contain at least one value")
    return items


def _algorithm_list(value: str) -> List[Algorithm]:
    try:
        return [Algorithm.parse(item) for item in value.split(",") if item.strip()]
    except InvalidInputError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _add_em_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--sigma0", type=_sigma0, default=None, help="initial noise variance or 'auto'")
    parser.add_argument("--eps1", type=float, default=None, help="log-likelihood increase tolerance")
    parser.add_argument("--eps2", type=float, default=None, help="relative change tolerance on M")
    parser.add_argument("--max-iters", type=int, default=None)
    parser.add_argument("--jitter", type=float, default=None)
    parser.add_argument("--workers", type=int, default=None, help="threads for row patterns / sweep cells")
    parser.add_argument("--config", type=Path, default=None, help="JSON config file")


def build_parser() -> argparse.ArgumentParser:
    parser = CliArgumentParser(
        prog="eb-complete",
        description="Empirical Bayes matrix completion, shrinkage baselines and benchmarks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {ver}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    commands = parser.add_subparsers(dest="command", required=True)

    fit_parser = commands.add_parser("fit", help="complete a matrix from a row,col,value file")
    fit_parser.add_argument("input", type=Path)
    fit_parser.add_argument("--p", type=int, default=None, help="rows (default: largest row index)")
    fit_parser.add_argument("--q", type=int, default=None, help="columns (default: largest column index)")
    fit_parser.add_argument("--algorithm", default="eb", help="eb, soft_impute or efron_morris")
    fit_parser.add_argument("--seed", type=int, default=0, help="seed for the soft-impute validation split")
    fit_parser.add_argument("--out", type=Path, required=True, help="completed matrix (dense CSV)")
    fit_parser.add_argument("--predict", type=Path, default=None, help="row,col list; write only these cells")
    fit_parser.add_argument("--report", type=Path, default=None, help="report path (default: <out>.report.txt)")
    fit_parser.add_argument("--positive-part", action="store_true", help="positive-part efron_morris")
    _add_em_flags(fit_parser)
    fit_parser.set_defaults(handler=cmd_fit)

    bench_parser = commands.add_parser("bench", help="synthetic experiment sweep")
    bench_parser.add_argument("--axis", required=True, help=", ".join(a.value for a in SweepAxis))
    bench_parser.add_argument("--grid", type=_float_list, required=True, help="comma-separated axis values")
    bench_parser.add_argument("--algorithm", type=_algorithm_list, default=None, help="comma-separated algorithms")
    bench_parser.add_argument("--p", type=int, default=None)
    bench_parser.add_argument("--q", type=int, default=None)
    bench_parser.add_argument("--r", type=int, default=None)
    bench_parser.add_argument("--sigma-sq", type=float, default=None, help="true noise variance")
    bench_parser.add_argument("--fill", type=float, default=None)
    bench_parser.add_argument("--seed", type=int, default=None)
    bench_parser.add_argument("--replicates", type=int, default=None)
    bench_parser.add_argument("--out", type=Path, required=True)
    _add_em_flags(bench_parser)
    bench_parser.set_defaults(handler=cmd_bench)

    holdout_parser = commands.add_parser("holdout", help="fit on a sample of the entries, score the rest")
    holdout_parser.add_argument("input", type=Path)
    holdout_parser.add_argument("--sample-size", type=int, required=True)
    holdout_parser.add_argument("--seed", type=int, default=0)
    holdout_parser.add_argument("--algorithm", default="eb")
    holdout_parser.add_argument("--p", type=int, default=None)
    holdout_parser.add_argument("--q", type=int, default=None)
    holdout_parser.add_argument("--out", type=Path, required=True, help="evaluation report")
    _add_em_flags(holdout_parser)
    holdout_parser.set_defaults(handler=cmd_holdout)

    return parser


def _completion_manager(args, config_service: ConfigService, seed: int) -> CompletionManager:
    em_config = config_service.em_config(
        sigma0_sq=args.sigma0, eps1=args.eps1, eps2=args.eps2,
        max_iters=args.max_iters, jitter=args.jitter, workers=args.workers,
    )
    soft_impute_config = config_service.soft_impute_config(rng_seed=seed)
    return CompletionManager(em_config, soft_impute_config, positive_part=getattr(args, "positive_part", False))


def cmd_fit(args) -> int:
    storage = StorageService()
    data = storage.read_triples(args.input, args.p, args.q)
    cells = storage.read_cells(args.predict, data.p, data.q) if args.predict else None
    if cells is None and data.p * data.q > storage.max_dense_cells:
        raise InvalidFlagsError(f"{data.p}x{data.q} exceeds the dense output cap; use --predict")

    manager = _completion_manager(args, ConfigService(args.config), args.seed)
    outcome = manager.complete(data, args.algorithm)

    if cells is not None:
        storage.write_predictions(args.out, outcome.M_hat, *cells)
    else:
        storage.write_dense(args.out, outcome.M_hat)

    report = {"p": data.p, "q": data.q, "n_observed": data.size, "fill_fraction": data.fill_fraction}
    report.update(outcome.summary())
    report_path = args.report or args.out.with_name(args.out.stem + ".report.txt")
    storage.write_report(report_path, report)

    print(f"Completed {data.p}x{data.q} matrix from {data.size} entries with {outcome.algorithm.value} "
          f"in {Helpers.format_duration(outcome.wall_time_s)}")
    print(f"Saved to {args.out} (report: {report_path})")
    return EXIT_OK


def cmd_bench(args) -> int:
    config_service = ConfigService(args.config)
    settings = config_service.bench_settings(
        p=args.p, q=args.q, r=args.r, sigma_sq=args.sigma_sq, fill=args.fill,
        seed=args.seed, replicates=args.replicates, workers=args.workers,
    )
    algorithms = args.algorithm or settings.pop("algorithms", None) or [Algorithm.EB]
    settings.pop("algorithms", None)
    workers = int(settings.pop("workers", 1) or 1)
    if args.sigma0 is not None:
        settings["sigma0_sq"] = args.sigma0

    try:
        base_spec = ExperimentSpec(**settings)
        axis = SweepAxis.parse(args.axis)
    except (InvalidInputError, TypeError) as e:
        raise InvalidFlagsError(str(e)) from e

    manager = BenchManager(
        em_config=config_service.em_config(eps1=args.eps1, eps2=args.eps2, max_iters=args.max_iters, jitter=args.jitter),
        soft_impute_config=config_service.soft_impute_config(),
        workers=workers,
    )
    rows = manager.run_sweep(axis, args.grid, base_spec, algorithms, on_cell=_print_cell(axis))
    StorageService().write_sweep(args.out, rows)

    stats = summarize(rows)
    print(f"Saved {stats['cells']} cells to {args.out} ({stats['failed']} failed)")
    return EXIT_OK


def _print_cell(axis: SweepAxis):
    def show(row: SweepRow):
        if row.error is not None:
            print(f"{axis.value}={row.axis_value:g} {row.algorithm.value}: FAILED ({row.error})")
            return
        print(f"{axis.value}={row.axis_value:g} {row.algorithm.value}: "
              f"error1={row.mean_error1:.4f} error2={row.mean_error2:.4f} "
              f"time={Helpers.format_duration(row.mean_time_s)} n={row.n_replicates}")
    return show


def cmd_holdout(args) -> int:
    storage = StorageService()
    data = storage.read_triples(args.input, args.p, args.q)
    manager = HoldoutManager(_completion_manager(args, ConfigService(args.config), args.seed))
    result = manager.evaluate(data, args.sample_size, seed=args.seed, algorithm=args.algorithm)
    storage.write_report(args.out, result.summary())

    print(f"Holdout error {result.error:.4f} on {result.heldout.size} entries "
          f"({result.outcome.algorithm.value}, {Helpers.format_duration(result.outcome.wall_time_s)})")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        Helpers.configure_logging(args.verbose)
        return args.handler(args)
    except MatrixCompletionError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code

"""
Command-line entry point: `kprior-bench [--config FILE] [flags]`.

Every key of `kpriorpy.bench.config.FLAGS` is a flag (`--memory-frac 0.1 --memory-frac 0.5` or
`--memory-frac 0.1,0.5` for repeatable ones). Flags override the values of the config file.
"""

from typing import Dict, List, Optional
import argparse
import logging
import sys

from tabulate import tabulate

from kpriorpy.bench.config import (
    FLAGS,
    ExperimentConfig,
    config_from_mapping,
    read_config_file,
)
from kpriorpy.bench.grid import ResultRecord, records_to_frame, run_grid
from kpriorpy.bench.plot_data import emit_plot_data
from kpriorpy.core.exceptions import InvalidConfigError, InvalidDataError, InvalidOptionError
from kpriorpy.core.logging_ops import get_logger_object, set_package_log_level

LOGGER = get_logger_object(logger_name=__name__)

SUMMARY_COLUMNS = ['test_acc', 'train_acc', 'l2_to_batch', 'pred_disagreement', 'grad_evals']
EXIT_OK = 0
EXIT_INVALID_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kprior-bench",
        description="Runs seeded grids of model-adaptation experiments (task x method x memory fraction x seed).",
    )
    parser.add_argument("--config", default=None, help="Text file of key=value lines (keys are the flag names)")
    for flag in FLAGS:
        if flag.switch:
            parser.add_argument(f"--{flag.name}", dest=flag.name, action='store_const', const="true", default=None, help=flag.help)
        elif flag.repeatable:
            parser.add_argument(f"--{flag.name}", dest=flag.name, action='append', default=None, help=flag.help)
        else:
            parser.add_argument(f"--{flag.name}", dest=flag.name, default=None, help=flag.help)
    return parser


def __given_flags(args: argparse.Namespace) -> Dict[str, str]:
    given = {}
    for flag in FLAGS:
        value = getattr(args, flag.name)
        if value is None:
            continue
        given[flag.name] = ",".join(value) if flag.repeatable else value
    return given


def resolve_config(argv: Optional[List[str]] = None) -> ExperimentConfig:
    """Defaults, then the `--config` file, then the flags. Raises InvalidConfigError on any invalid value."""
    args = build_parser().parse_args(args=argv)
    values: Dict[str, str] = {}
    if args.config is not None:
        values.update(read_config_file(path=args.config))
    values.update(__given_flags(args=args))
    return config_from_mapping(values=values)


def configure_logging(cfg: ExperimentConfig) -> None:
    level = logging.DEBUG if cfg.verbose else logging.INFO
    if cfg.log_file is not None:
        get_logger_object(logger_name="kpriorpy", filepath=cfg.log_file, level=level)
    set_package_log_level(level=level)
    return None


def summary_table(records: List[ResultRecord]) -> str:
    """Means over replicates per (task, method, memory fraction), as a GitHub-style table"""
    df = records_to_frame(records=records)
    df_summary = (
        df.astype({column: float for column in SUMMARY_COLUMNS})
        .groupby(by=['task', 'method', 'memory_fraction'], sort=True)[SUMMARY_COLUMNS]
        .mean()
        .reset_index()
    )
    return tabulate(df_summary, headers='keys', tablefmt='github', floatfmt='.4g', showindex=False)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        cfg = resolve_config(argv=argv)
    except (InvalidConfigError, OSError) as error:
        print(f"kprior-bench: invalid configuration: {error}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    configure_logging(cfg=cfg)
    LOGGER.info(f"Configuration: {cfg}")
    try:
        records = run_grid(cfg=cfg)
        if cfg.plot_dir is not None:
            emit_plot_data(records=records, x=cfg.plot_x, y=cfg.plot_y, group_by=cfg.plot_group, out_dir=cfg.plot_dir)
    except (InvalidDataError, InvalidOptionError, OSError) as error:
        LOGGER.error(f"Benchmark failed: {error}")
        print(f"kprior-bench: {error}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    print(summary_table(records=records))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

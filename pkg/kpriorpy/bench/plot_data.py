import os
import re
from typing import List, Sequence

import pandas as pd

from kpriorpy.bench.grid import ResultRecord, records_to_frame
from kpriorpy.core.exceptions import raise_exception_if_invalid_option
from kpriorpy.core.logging_ops import get_logger_object

LOGGER = get_logger_object(logger_name=__name__)

PLOT_DATA_EXTENSION = "dat"


def __format_value(value: object) -> str:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return f"{value:.10g}"
    return str(value)


def __group_filename(group_by: Sequence[str], values: Sequence[object]) -> str:
    if not group_by:
        return f"all.{PLOT_DATA_EXTENSION}"
    parts = [f"{field}-{value}" for field, value in zip(group_by, values)]
    return re.sub(pattern=r"[^A-Za-z0-9._=-]+", repl="_", string="__".join(parts)) + f".{PLOT_DATA_EXTENSION}"


def summarize(
        df: pd.DataFrame,
        x: str,
        y: str,
        group_by: Sequence[str] = (),
    ) -> pd.DataFrame:
    """
    Mean and population standard deviation (ddof=0) of `y` over the rows sharing the same group and `x`.
    Rows where `y` is missing are ignored. Returns columns: [*group_by, x, 'mean', 'std'] sorted by group, then x.
    """
    for field in list(group_by) + [x, y]:
        raise_exception_if_invalid_option(option_name='field', option_value=field, valid_option_values=df.columns.tolist())
    keys = list(group_by) + [x]
    df_valid = df.dropna(subset=[y])
    df_summary = (
        df_valid.astype({y: float})
        .groupby(by=keys, sort=True)[y]
        .agg(mean='mean', std=lambda values: values.std(ddof=0))
        .reset_index()
    )
    return df_summary.sort_values(by=keys, ignore_index=True)


def emit_plot_data(
        records: List[ResultRecord],
        x: str,
        y: str,
        group_by: Sequence[str],
        out_dir: str,
    ) -> List[str]:
    """
    Writes one whitespace-separated file per group into `out_dir`, with columns: x, mean(y), std(y) over
    replicates, sorted by x. The first line is a '#' header. Returns the filepaths written.
    Raises InvalidOptionError for a field that is not a column of the records.

    >>> emit_plot_data(records, x='memory_fraction', y='test_acc', group_by=['method'], out_dir="plots")
    >>> # Writes 'plots/method-kprior.dat', 'plots/method-replay.dat', ...
    """
    group_by = list(group_by)
    targets = tuple(sorted({target for record in records for target, _ in record.grad_evals_to_target}))
    df = records_to_frame(records=records, targets=targets)
    df_summary = summarize(df=df, x=x, y=y, group_by=group_by)
    os.makedirs(out_dir, exist_ok=True)
    filepaths = []
    groups = df_summary.groupby(by=group_by, sort=True) if group_by else [((), df_summary)]
    for values, df_group in groups:
        values = values if isinstance(values, tuple) else (values,)
        filepath = os.path.join(out_dir, __group_filename(group_by=group_by, values=values))
        with open(filepath, mode='w', encoding='utf8', newline='\n') as file:
            file.write(f"# {x} mean_{y} std_{y}\n")
            for x_value, mean, std in zip(df_group[x], df_group['mean'], df_group['std']):
                file.write(" ".join([__format_value(x_value), __format_value(float(mean)), __format_value(float(std))]) + "\n")
        filepaths.append(filepath)
    LOGGER.info(f"Wrote {len(filepaths)} plot-data file(s) to {out_dir}")
    return filepaths

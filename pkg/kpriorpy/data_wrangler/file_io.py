"""
Readers and writers for preprocessed classification datasets.

Sparse text format, one example per line: "label idx:val idx:val ..." with 1-based, strictly ascending
feature indices; absent indices are 0. Dense CSV: numeric columns under a header row, one of which holds
the labels.
"""

from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from kpriorpy.core.exceptions import InvalidDataError
from kpriorpy.core.logging_ops import get_logger_object
from kpriorpy.glm.models import LabeledData

LOGGER = get_logger_object(logger_name=__name__)


def __parse_sparse_line(line: str, line_number: int) -> Tuple[float, List[Tuple[int, float]]]:
    tokens = line.split()
    try:
        label = float(tokens[0])
    except ValueError:
        raise InvalidDataError(f"Line {line_number}: could not parse the label {tokens[0]!r}")
    entries = []
    for token in tokens[1:]:
        index, separator, value = token.partition(":")
        if separator != ":":
            raise InvalidDataError(f"Line {line_number}: expected 'idx:val', but got {token!r}")
        try:
            entry = (int(index), float(value))
        except ValueError:
            raise InvalidDataError(f"Line {line_number}: could not parse {token!r}")
        if entry[0] < 1:
            raise InvalidDataError(f"Line {line_number}: feature indices are 1-based, but got {entry[0]}")
        if entries and entry[0] <= entries[-1][0]:
            raise InvalidDataError(f"Line {line_number}: feature indices must be strictly ascending, but got {entry[0]} after {entries[-1][0]}")
        entries.append(entry)
    return label, entries


def load_sparse(
        path: str,
        num_features: Optional[int] = None,
    ) -> LabeledData:
    """
    Reads a sparse text file into a dense LabeledData. The number of columns is the largest index seen,
    or `num_features` if given (which must cover every index).

    >>> # A file holding the line "1 1:2.0 3:1.5" gives inputs [[2.0, 0.0, 1.5]] and labels [1.0]
    """
    labels, rows = [], []
    with open(path, mode='r', encoding='utf8') as file:
        for line_number, line in enumerate(file, start=1):
            if not line.strip():
                continue
            label, entries = __parse_sparse_line(line=line, line_number=line_number)
            labels.append(label)
            rows.append(entries)
    max_index = max([entries[-1][0] for entries in rows if entries], default=0)
    if num_features is not None:
        if num_features < max_index:
            raise InvalidDataError(f"File {path} has feature index {max_index} > num_features={num_features}")
        max_index = num_features
    inputs = np.zeros((len(rows), max_index))
    for row, entries in enumerate(rows):
        for index, value in entries:
            inputs[row, index - 1] = value
    LOGGER.debug(f"Loaded {len(rows)} rows with {max_index} features from {path}")
    return LabeledData(inputs=inputs, labels=np.array(labels, dtype=float))


def __format_number(value: float) -> str:
    return f"{value:.17g}"


def save_sparse(data: LabeledData, path: str) -> None:
    """Writes `data` in the sparse text format, keeping only non-zero entries (17 significant digits)"""
    with open(path, mode='w', encoding='utf8') as file:
        for features, label in zip(data.inputs, data.labels):
            entries = [f"{index + 1}:{__format_number(features[index])}" for index in np.flatnonzero(features)]
            file.write(" ".join([__format_number(label)] + entries) + "\n")
    return None


def load_dense_csv(
        path: str,
        label_column: str,
    ) -> LabeledData:
    """
    Reads a numeric CSV with a header. Labels come from `label_column`, features from the remaining columns
    in header order. A non-numeric (or empty) cell raises InvalidDataError naming its row and column.
    """
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise InvalidDataError(f"File {path} has no header row")
    if label_column not in df.columns:
        raise InvalidDataError(f"Label column {label_column!r} not found in {path}; columns are {df.columns.tolist()}")
    numeric = pd.DataFrame(index=df.index)
    for column in df.columns:
        converted = pd.to_numeric(df[column].str.strip(), errors='coerce')
        bad_rows = np.flatnonzero(converted.isna().to_numpy())
        if len(bad_rows) > 0:
            row = int(bad_rows[0])
            raise InvalidDataError(
                f"Non-numeric value {df[column].iloc[row]!r} in {path} at data row {row + 1} (line {row + 2}), column {column!r}"
            )
        numeric[column] = converted.astype(float)
    feature_columns = [column for column in df.columns if column != label_column]
    inputs = numeric[feature_columns].to_numpy(dtype=float).reshape(len(df), len(feature_columns))
    return LabeledData(inputs=inputs, labels=numeric[label_column].to_numpy(dtype=float))

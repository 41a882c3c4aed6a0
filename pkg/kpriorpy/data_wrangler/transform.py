from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from kpriorpy.core.exceptions import InvalidDataError
from kpriorpy.core.random_ops import get_random_generator
from kpriorpy.core.utils import create_string_repr
from kpriorpy.glm.models import LabeledData


@dataclass(frozen=True)
class SplitSpec:
    """
    Random subset of a dataset, given either as a `fraction` in (0, 1] or as a `count` of rows.
    With `stratify=True` every label keeps its share of the subset (largest remainders get the leftovers).
    """
    fraction: Optional[float] = None
    count: Optional[int] = None
    seed: int = 0
    stratify: bool = False

    def __post_init__(self) -> None:
        if (self.fraction is None) == (self.count is None):
            raise ValueError("Exactly one of `fraction` and `count` must be given")
        if self.fraction is not None and not 0.0 < self.fraction <= 1.0:
            raise ValueError(f"Expected 0 < `fraction` <= 1, but got {self.fraction}")
        if self.count is not None and self.count < 0:
            raise ValueError(f"Expected `count` >= 0, but got {self.count}")

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={'fraction': self.fraction, 'count': self.count, 'seed': self.seed, 'stratify': self.stratify},
        )

    def subset_size(self, num_examples: int) -> int:
        if self.count is not None:
            if self.count > num_examples:
                raise InvalidDataError(f"Cannot take {self.count} rows out of {num_examples}")
            return self.count
        return int(round(self.fraction * num_examples))


def __stratified_counts(labels: np.ndarray, size: int) -> Tuple[np.ndarray, np.ndarray]:
    classes, class_sizes = np.unique(labels, return_counts=True)
    quotas = size * class_sizes / len(labels)
    counts = np.floor(quotas).astype(int)
    leftover = size - int(counts.sum())
    # ties in the remainders go to the smaller class label
    order = np.lexsort((classes, -(quotas - counts)))
    counts[order[:leftover]] += 1
    return classes, counts


def split_indices(
        data: LabeledData,
        spec: SplitSpec,
    ) -> np.ndarray:
    """Sorted row indices of the subset described by `spec`"""
    size = spec.subset_size(num_examples=data.num_examples)
    rng = get_random_generator(seed=spec.seed)
    if not spec.stratify:
        chosen = rng.choice(data.num_examples, size=size, replace=False) if size > 0 else np.zeros(0, dtype=int)
    else:
        classes, counts = __stratified_counts(labels=data.labels, size=size)
        chosen_per_class = []
        for label, count in zip(classes, counts):
            members = np.flatnonzero(data.labels == label)
            chosen_per_class.append(rng.choice(members, size=count, replace=False))
        chosen = np.concatenate(chosen_per_class) if chosen_per_class else np.zeros(0, dtype=int)
    return np.sort(chosen.astype(int))


def split_data(
        data: LabeledData,
        spec: SplitSpec,
    ) -> Tuple[LabeledData, LabeledData]:
    """
    Returns (selected, rest). Both keep the original relative order of the rows.

    >>> selected, rest = split_data(data=train, spec=SplitSpec(fraction=0.1, seed=3, stratify=True))
    """
    chosen = split_indices(data=data, spec=spec)
    return data.take(indices=chosen), data.drop(indices=chosen)


def standardize(
        train: LabeledData,
        others: List[LabeledData],
    ) -> Tuple[LabeledData, List[LabeledData], np.ndarray, np.ndarray]:
    """
    Scales every column to (x - mean) / std using the statistics of `train` only. Columns that are
    constant in `train` (std = 0) are centered but not scaled. Returns (train, others, mean, std).
    """
    if train.num_examples == 0:
        raise InvalidDataError("Cannot standardize with an empty training set")
    mean = train.inputs.mean(axis=0)
    std = train.inputs.std(axis=0)
    scale = np.where(std == 0, 1.0, std)

    def transform(data: LabeledData) -> LabeledData:
        return LabeledData(inputs=(data.inputs - mean) / scale, labels=data.labels)

    return transform(train), [transform(data) for data in others], mean, std

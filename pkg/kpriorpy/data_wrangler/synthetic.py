"""
Synthetic datasets: two interleaved half-moons, ordered splits along the first coordinate and a split that
concentrates one class in the added data.
"""

from typing import List, Tuple

import numpy as np

from kpriorpy.core.exceptions import InvalidDataError
from kpriorpy.core.random_ops import get_random_generator
from kpriorpy.core.utils import Partitioner
from kpriorpy.glm.models import LabeledData

MOONS_SHIFT = (1.0, -0.5)


def make_moons(
        n: int,
        noise: float,
        seed: int,
    ) -> LabeledData:
    """
    Two interleaved half-circles of radius 1 with n/2 points each, plus isotropic Gaussian noise of standard
    deviation `noise`. Class 0 lies on (cos t, sin t) and class 1 on (1 - cos t, 0.5 - sin t), with t ~ U[0, pi].
    Rows are shuffled.
    """
    if n < 0 or n % 2 != 0:
        raise InvalidDataError(f"Expected a non-negative even `n`, but got {n}")
    if noise < 0:
        raise ValueError(f"Expected `noise` >= 0, but got {noise}")
    rng = get_random_generator(seed=seed)
    half = n // 2
    angles = rng.uniform(low=0.0, high=np.pi, size=(2, half))
    upper = np.column_stack([np.cos(angles[0]), np.sin(angles[0])])
    lower = np.column_stack([MOONS_SHIFT[0] - np.cos(angles[1]), -np.sin(angles[1]) - MOONS_SHIFT[1]])
    inputs = np.vstack([upper, lower])
    labels = np.concatenate([np.zeros(half), np.ones(half)])
    if noise > 0:
        inputs = inputs + rng.normal(loc=0.0, scale=noise, size=inputs.shape)
    order = rng.permutation(n)
    return LabeledData(inputs=inputs[order], labels=labels[order])


def ordered_splits(
        data: LabeledData,
        num_splits: int = 5,
    ) -> List[LabeledData]:
    """
    Sorts the rows by their first coordinate (stable) and cuts them into `num_splits` contiguous splits
    whose sizes differ by at most 1.
    """
    order = np.argsort(data.inputs[:, 0], kind='stable')
    index_ranges = Partitioner(iterable_length=data.num_examples).index_ranges_by_num_partitions(num_partitions=num_splits)
    return [data.take(indices=order[idx_start:idx_end]) for idx_start, idx_end in index_ranges]


def concat_splits(splits: List[LabeledData]) -> LabeledData:
    combined = splits[0]
    for split in splits[1:]:
        combined = combined.concat(split)
    return combined


def class_concentrated_split(
        data: LabeledData,
        new_class: float,
        new_fraction: float,
        seed: int,
    ) -> Tuple[LabeledData, LabeledData]:
    """
    Returns (old, new): `new` is a random `new_fraction` of the rows labelled `new_class` and `old` holds
    all other rows, so the added data comes from a single class.
    """
    if not 0.0 < new_fraction <= 1.0:
        raise ValueError(f"Expected 0 < `new_fraction` <= 1, but got {new_fraction}")
    rng = get_random_generator(seed=seed)
    candidates = np.flatnonzero(data.labels == new_class)
    if len(candidates) == 0:
        raise InvalidDataError(f"No rows with label {new_class}")
    num_new = max(1, int(round(new_fraction * len(candidates))))
    chosen = np.sort(rng.choice(candidates, size=num_new, replace=False))
    return data.drop(indices=chosen), data.take(indices=chosen)

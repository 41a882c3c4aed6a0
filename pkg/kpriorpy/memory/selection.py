"""
Selection of the memory set and recording of the base model's soft labels.

A model passed to the selectors only needs two methods: `logits(inputs)` and `selection_scores(logits)`.
`GlmModel` scores points by h'(f) and `MlpModel` by h'(f) (sigmoid output) or by the trace of the
softmax Jacobian (softmax output).
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from kpriorpy.core.exceptions import (
    MemorySelectionError,
    raise_exception_if_invalid_option,
)
from kpriorpy.core.random_ops import get_random_generator
from kpriorpy.core.utils import create_string_repr
from kpriorpy.glm.models import LabeledData

TOP_H_PRIME = "memorable"
RANDOM = "random"
SELECTION_STRATEGIES = [TOP_H_PRIME, RANDOM]
SIMPLEX_TOLERANCE = 1e-8


@dataclass(frozen=True)
class MemorySet:
    """
    Memory of past inputs. Rows are stored in ascending order of `indices` (row indices into the source data).
    `soft_logits` are the base model's outputs f_{w*}(u_i) recorded at selection time: shape (M,) for scalar
    outputs and (M, K) for softmax outputs. NaN soft logits mean none were recorded.
    """
    indices: np.ndarray
    inputs: np.ndarray
    soft_logits: np.ndarray
    true_labels: np.ndarray
    strategy: str
    source_size: int

    def __post_init__(self) -> None:
        raise_exception_if_invalid_option(option_name='strategy', option_value=self.strategy, valid_option_values=SELECTION_STRATEGIES)
        indices = np.asarray(self.indices, dtype=int).reshape(-1)
        if np.any(np.diff(indices) <= 0):
            raise MemorySelectionError("Expected memory indices to be unique and sorted ascending")
        sizes = {len(indices), len(self.inputs), len(self.soft_logits), len(self.true_labels)}
        if len(sizes) != 1:
            raise MemorySelectionError(f"Expected equal numbers of indices, inputs, soft logits and labels, but got sizes {sizes}")
        for name, value in [('indices', indices), ('inputs', self.inputs), ('soft_logits', self.soft_logits), ('true_labels', self.true_labels)]:
            array = np.array(value, dtype=int if name == 'indices' else float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={'size': self.size, 'source_size': self.source_size, 'strategy': self.strategy},
        )

    def __len__(self) -> int:
        return self.size

    @property
    def size(self) -> int:
        return int(len(self.indices))

    @property
    def fraction(self) -> float:
        return self.size / self.source_size if self.source_size else 0.0

    @property
    def has_soft_labels(self) -> bool:
        return bool(np.all(np.isfinite(self.soft_logits)))

    def take(self, positions: Sequence[int]) -> "MemorySet":
        """Returns the sub-memory at `positions` (positions within this memory, not source row indices)"""
        positions = np.sort(np.asarray(positions, dtype=int))
        return MemorySet(
            indices=self.indices[positions],
            inputs=self.inputs[positions],
            soft_logits=self.soft_logits[positions],
            true_labels=self.true_labels[positions],
            strategy=self.strategy,
            source_size=self.source_size,
        )

    def without_rows(self, row_indices: Sequence[int]) -> "MemorySet":
        """Returns the memory without the entries whose source row index is in `row_indices`"""
        keep = np.flatnonzero(~np.isin(self.indices, np.asarray(row_indices, dtype=int)))
        return self.take(positions=keep)

    def as_labeled_data(self) -> LabeledData:
        """The memory with its true labels (what Replay trains on)"""
        return LabeledData(inputs=self.inputs, labels=self.true_labels)


def _build_memory(
        data: LabeledData,
        indices: np.ndarray,
        strategy: str,
        model: Optional[object],
    ) -> MemorySet:
    indices = np.sort(np.asarray(indices, dtype=int))
    inputs = data.inputs[indices]
    if model is None:
        soft_logits = np.full(len(indices), np.nan)
    else:
        soft_logits = np.asarray(model.logits(inputs), dtype=float)
    return MemorySet(
        indices=indices,
        inputs=inputs,
        soft_logits=soft_logits,
        true_labels=data.labels[indices],
        strategy=strategy,
        source_size=data.num_examples,
    )


def _validate_memory_size(data: LabeledData, m: int) -> None:
    if m < 0 or m > data.num_examples:
        raise MemorySelectionError(f"Expected 0 <= m <= N={data.num_examples}, but got m={m}")
    return None


def select_memorable(
        model: object,
        data: LabeledData,
        m: int,
    ) -> MemorySet:
    """
    Selects the m rows with the largest curvature score (h'(f_{w*}) for scalar outputs), breaking ties
    towards the smaller row index, and records the model's logits at those rows as soft labels.
    """
    _validate_memory_size(data=data, m=m)
    scores = np.asarray(model.selection_scores(model.logits(data.inputs)), dtype=float)
    order = np.lexsort((np.arange(data.num_examples), -scores))
    return _build_memory(data=data, indices=order[:m], strategy=TOP_H_PRIME, model=model)


def select_random(
        data: LabeledData,
        m: int,
        seed: int,
        model: Optional[object] = None,
    ) -> MemorySet:
    """
    Uniform sample of m rows without replacement, drawn with the PCG64 generator seeded by `seed`
    (see kpriorpy.core.random_ops). Soft labels are recorded if `model` is given.
    """
    _validate_memory_size(data=data, m=m)
    rng = get_random_generator(seed=seed)
    indices = rng.choice(data.num_examples, size=m, replace=False) if m > 0 else np.zeros(0, dtype=int)
    return _build_memory(data=data, indices=indices, strategy=RANDOM, model=model)


def record_soft_labels(
        memory: MemorySet,
        model: object,
    ) -> MemorySet:
    """Returns a copy of `memory` whose soft logits are the given model's outputs at the memory inputs"""
    return MemorySet(
        indices=memory.indices,
        inputs=memory.inputs,
        soft_logits=np.asarray(model.logits(memory.inputs), dtype=float),
        true_labels=memory.true_labels,
        strategy=memory.strategy,
        source_size=memory.source_size,
    )


def select_memory(
        strategy: str,
        model: object,
        data: LabeledData,
        m: int,
        seed: int = 0,
    ) -> MemorySet:
    """Dispatches on `strategy`. Options for `strategy` are: ['memorable', 'random']"""
    raise_exception_if_invalid_option(option_name='strategy', option_value=strategy, valid_option_values=SELECTION_STRATEGIES)
    if strategy == TOP_H_PRIME:
        return select_memorable(model=model, data=data, m=m)
    return select_random(data=data, m=m, seed=seed, model=model)


def multiclass_score(probabilities: np.ndarray) -> np.ndarray:
    """
    Trace of the softmax Jacobian diag(p) - pp^T, i.e. 1 - sum_k p_k^2. Works on a single probability
    vector or on a matrix with one probability vector per row.

    >>> multiclass_score(np.array([0.25, 0.25, 0.25, 0.25])) # Returns 0.75
    """
    probabilities = np.asarray(probabilities, dtype=float)
    if np.any(probabilities < 0) or np.any(np.abs(probabilities.sum(axis=-1) - 1.0) > SIMPLEX_TOLERANCE):
        raise MemorySelectionError("Expected probabilities to be non-negative and to sum to 1")
    return 1.0 - np.sum(probabilities**2, axis=-1)

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from kpriorpy.core.exceptions import NonFiniteObjectiveError
from kpriorpy.core.logging_ops import get_logger_object
from kpriorpy.core.random_ops import get_random_generator
from kpriorpy.core.type_annotations import Oracle
from kpriorpy.core.utils import Partitioner
from kpriorpy.optim.quasi_newton import (
    IterationCallback,
    OptimResult,
)

LOGGER = get_logger_object(logger_name=__name__)

BatchOracle = Callable[[np.ndarray, np.ndarray], Tuple[float, np.ndarray]]


@dataclass(frozen=True)
class MinibatchConfig:
    batch_size: int = 128
    learning_rate: float = 1e-3
    epochs: int = 100
    seed: int = 0
    grad_tol: float = 1e-8

    def __post_init__(self) -> None:
        if self.batch_size < 1 or self.epochs < 0 or self.learning_rate <= 0:
            raise ValueError(f"Invalid minibatch configuration: {self}")


def minimize_minibatch(
        batch_oracle: BatchOracle,
        full_oracle: Oracle,
        num_examples: int,
        w0: np.ndarray,
        cfg: MinibatchConfig,
        callback: Optional[IterationCallback] = None,
    ) -> OptimResult:
    """
    Constant-step first-order training over seeded, shuffled, fixed-size minibatches.

    `batch_oracle(w, rows)` must return an estimate of the full objective/gradient from the examples in
    `rows` (indices into [0, num_examples)); `full_oracle` is only used once at the end to report the
    final gradient norm. The step is `w -= learning_rate * grad / num_examples`, so the learning rate
    applies to the per-example average gradient.
    """
    rng = get_random_generator(seed=cfg.seed)
    w = np.array(w0, dtype=float).reshape(-1)
    grad_evals = 0
    backprops = 0
    scale = 1.0 / max(num_examples, 1)
    batch_ranges = Partitioner(iterable_length=num_examples).index_ranges_by_max_partition_size(
        max_partition_size=min(cfg.batch_size, num_examples),
    ) if num_examples > 0 else [(0, 0)]
    for epoch in range(cfg.epochs):
        order = rng.permutation(num_examples)
        for idx_start, idx_end in batch_ranges:
            rows = order[idx_start:idx_end]
            value, grad = batch_oracle(w, rows)
            grad_evals += 1
            backprops += len(rows)
            if not np.isfinite(value) or not np.all(np.isfinite(grad)):
                raise NonFiniteObjectiveError(f"Minibatch oracle returned a non-finite value in epoch {epoch}")
            w = w - cfg.learning_rate * scale * np.asarray(grad, dtype=float)
            if callback is not None:
                callback(w.copy(), backprops)
        LOGGER.debug(f"epoch={epoch} last_batch_value={value:.6e}")
    value, grad = full_oracle(w)
    grad_inf_norm = float(np.max(np.abs(grad), initial=0.0))
    return OptimResult(
        weights=w,
        value=float(value),
        grad_inf_norm=grad_inf_norm,
        iters=cfg.epochs * len(batch_ranges),
        grad_evals=grad_evals,
        converged=grad_inf_norm <= cfg.grad_tol,
        backprops=backprops,
        message="epochs exhausted",
    )

"""
Objectives of the adaptation methods.

An `Objective` is a sum of per-example blocks (data losses and K-prior functional terms, each summed over
its own rows) plus one weight-space term. Called with w it returns the full (value, grad); `minibatch`
returns an unbiased estimate from a subset of the concatenated rows, which is what the minibatch
trainer needs. `num_examples` is the cost of one full evaluation in example-gradient units.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from kpriorpy.adapt.model_context import ModelContext
from kpriorpy.adapt.tasks import ADD_DATA, TaskPlan
from kpriorpy.core.exceptions import UnsupportedTaskError
from kpriorpy.core.type_annotations import Oracle
from kpriorpy.core.utils import create_string_repr
from kpriorpy.glm.models import LabeledData
from kpriorpy.kprior.divergences import (
    WeightDivergenceSpec,
    weight_divergence_grad,
    weight_divergence_value,
)
from kpriorpy.kprior.priors import weight_prior_quad
from kpriorpy.memory.selection import MemorySet

RowsOracle = Callable[[np.ndarray, Optional[np.ndarray]], Tuple[float, np.ndarray]]


@dataclass(frozen=True)
class ExampleBlock:
    """`evaluate(w, rows)` sums the block over `rows` (positions within the block; None means all rows)"""
    name: str
    num_examples: int
    evaluate: RowsOracle


@dataclass(frozen=True)
class Objective:
    blocks: Tuple[ExampleBlock, ...]
    weight_term: Oracle
    num_params: int

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={'blocks': [(block.name, block.num_examples) for block in self.blocks], 'num_params': self.num_params},
        )

    @property
    def num_examples(self) -> int:
        return sum(block.num_examples for block in self.blocks)

    def __call__(self, w: np.ndarray) -> Tuple[float, np.ndarray]:
        value, grad = self.weight_term(w)
        grad = np.array(grad, dtype=float)
        for block in self.blocks:
            if block.num_examples == 0:
                continue
            block_value, block_grad = block.evaluate(w, None)
            value += block_value
            grad += block_grad
        return float(value), grad

    def minibatch(self, w: np.ndarray, rows: np.ndarray) -> Tuple[float, np.ndarray]:
        """Estimate of the full objective from `rows` (indices into the blocks' concatenated rows)"""
        rows = np.asarray(rows, dtype=int)
        value, grad = self.weight_term(w)
        grad = np.array(grad, dtype=float)
        if len(rows) == 0:
            return float(value), grad
        scale = self.num_examples / len(rows)
        offset = 0
        for block in self.blocks:
            local = rows[(rows >= offset) & (rows < offset + block.num_examples)] - offset
            offset += block.num_examples
            if len(local) == 0:
                continue
            block_value, block_grad = block.evaluate(w, local)
            value += scale * block_value
            grad += scale * np.asarray(block_grad, dtype=float)
        return float(value), grad


def _subset(data: LabeledData, rows: Optional[np.ndarray]) -> LabeledData:
    return data if rows is None else data.take(indices=rows)


def data_block(
        context: ModelContext,
        data: LabeledData,
        name: str,
        scale: float = 1.0,
    ) -> ExampleBlock:
    """scale * sum_i l(y_i, h(f_w(x_i))) over `data`"""
    def evaluate(w: np.ndarray, rows: Optional[np.ndarray]) -> Tuple[float, np.ndarray]:
        value, grad = context.data_value_and_grad(w=w, data=_subset(data=data, rows=rows))
        return scale * value, scale * grad
    return ExampleBlock(name=name, num_examples=data.num_examples, evaluate=evaluate)


def kprior_block(
        context: ModelContext,
        base_weights: np.ndarray,
        memory: MemorySet,
        scale: float = 1.0,
        temperature: float = 1.0,
    ) -> ExampleBlock:
    """scale * (functional term of the K-prior) over the memory rows"""
    full = context.kprior_oracle(base_weights=base_weights, memory=memory, weight_div=None, temperature=temperature)

    def evaluate(w: np.ndarray, rows: Optional[np.ndarray]) -> Tuple[float, np.ndarray]:
        oracle = full if rows is None else context.kprior_oracle(
            base_weights=base_weights,
            memory=memory.take(positions=rows),
            weight_div=None,
            temperature=temperature,
        )
        value, grad = oracle(w)
        return scale * value, scale * grad
    return ExampleBlock(name="kprior", num_examples=memory.size, evaluate=evaluate)


def l2_term(delta: float) -> Oracle:
    """(delta/2) ||w||^2"""
    return lambda w: (0.5 * delta * float(w @ w), delta * np.asarray(w, dtype=float))


def divergence_term(
        divergence: WeightDivergenceSpec,
        anchor: Optional[np.ndarray],
        scale: float = 1.0,
    ) -> Oracle:
    """scale * D_w(w || anchor)"""
    def oracle(w: np.ndarray) -> Tuple[float, np.ndarray]:
        value = weight_divergence_value(divergence=divergence, w=w, anchor=anchor)
        grad = weight_divergence_grad(divergence=divergence, w=w, anchor=anchor)
        return scale * value, scale * grad
    return oracle


def batch_objective(context: ModelContext, plan: TaskPlan) -> Objective:
    """The adapted problem solved from scratch: sum of losses over kept old + new rows with (delta_new/2)||w||^2"""
    return Objective(
        blocks=(data_block(context=context, data=plan.final_data, name="data"),),
        weight_term=l2_term(delta=plan.delta_new),
        num_params=context.num_params,
    )


def kprior_objective(
        context: ModelContext,
        plan: TaskPlan,
        base_weights: np.ndarray,
        memory: MemorySet,
        weight_div: WeightDivergenceSpec,
        anchor: Optional[np.ndarray],
        tau: float = 1.0,
        kd_lambda: float = 0.0,
        temperature: float = 1.0,
    ) -> Objective:
    """
    l_new(w) - l_removed(w) + (1 - kd_lambda) K(w) + kd_lambda * sum_{i in M} l(y_i, h(f_w(u_i))),
    where K(w) is the functional term over the memory plus tau * D_w(w || anchor).
    """
    if not 0.0 <= kd_lambda <= 1.0:
        raise ValueError(f"Expected `kd_lambda` in [0, 1], but got {kd_lambda}")
    blocks = [
        data_block(context=context, data=plan.new_data, name="new"),
        data_block(context=context, data=plan.removed, name="removed", scale=-1.0),
    ]
    if kd_lambda < 1:
        blocks.append(
            kprior_block(
                context=context,
                base_weights=base_weights,
                memory=memory,
                scale=1.0 - kd_lambda,
                temperature=temperature,
            )
        )
    if kd_lambda > 0:
        blocks.append(data_block(context=context, data=memory.as_labeled_data(), name="memory-labels", scale=kd_lambda))
    return Objective(
        blocks=tuple(blocks),
        weight_term=divergence_term(divergence=weight_div, anchor=anchor, scale=tau * (1.0 - kd_lambda)),
        num_params=context.num_params,
    )


def replay_objective(
        context: ModelContext,
        plan: TaskPlan,
        memory: MemorySet,
        replay_tau: float = 1.0,
    ) -> Objective:
    """
    Retraining on the memory (true labels, removed rows left out) plus the new rows, with the regularizer
    replay_tau * (delta_new/2)||w||^2 centered at zero.
    """
    replayed = memory.without_rows(row_indices=plan.removed_indices).as_labeled_data()
    return Objective(
        blocks=(
            data_block(context=context, data=replayed, name="memory"),
            data_block(context=context, data=plan.new_data, name="new"),
        ),
        weight_term=l2_term(delta=replay_tau * plan.delta_new),
        num_params=context.num_params,
    )


def weight_prior_objective(
        context: ModelContext,
        plan: TaskPlan,
        base_weights: np.ndarray,
        ggn_full: np.ndarray,
    ) -> Objective:
    """l_new(w) + 1/2 (w - w*)^T [G + delta I] (w - w*), with delta the old regularizer strength"""
    if plan.kind != ADD_DATA:
        raise UnsupportedTaskError(f"Weight-priors only support the '{ADD_DATA}' task, but got '{plan.kind}'")
    return Objective(
        blocks=(data_block(context=context, data=plan.new_data, name="new"),),
        weight_term=lambda w: weight_prior_quad(w=w, w_star=base_weights, ggn_full=ggn_full, delta=plan.delta_old),
        num_params=context.num_params,
    )

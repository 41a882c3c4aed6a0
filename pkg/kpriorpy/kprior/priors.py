"""
K-priors for generalized linear models.

    K(w) = sum_{i in M} B_A(f_w(u_i) || f*_i) + tau * D_w(w || anchor)

B_A is the Bregman divergence of the family's log-partition, f*_i are the soft logits stored in the memory
and `anchor` is w* (or A w* when the model class changes through the P_new x P_old matrix A).
The gradient of the functional term is sum_i phi(u_i) [h(f_w(u_i)) - h(f*_i)].
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from kpriorpy.core.exceptions import (
    DimensionMismatchError,
    MemorySelectionError,
    raise_exception_if_invalid_shape,
)
from kpriorpy.core.utils import create_string_repr
from kpriorpy.glm.families import ExpFamily, bregman_log_partition
from kpriorpy.glm.features import FeatureMap
from kpriorpy.glm.models import (
    GlmModel,
    LabeledData,
    ggn_matrix,
    glm_gradient,
)
from kpriorpy.kprior.divergences import (
    WeightDivergenceSpec,
    weight_divergence_grad,
    weight_divergence_value,
)
from kpriorpy.memory.selection import MemorySet


@dataclass(frozen=True)
class KPriorSpec:
    """
    Frozen adaptation prior. `memory.soft_logits` must have been recorded under `base_weights` and the
    old feature map. `model_map` is the optional P_new x P_old matrix A; without it the old and new
    weight spaces must coincide. With `weight_div=None` the prior is the functional term alone and
    `model_map` is dropped.
    """
    base_weights: np.ndarray
    memory: MemorySet
    weight_div: WeightDivergenceSpec
    family: ExpFamily
    feature_map_new: FeatureMap
    tau: float = 1.0
    model_map: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise ValueError(f"Expected `tau` > 0, but got {self.tau}")
        if not self.memory.has_soft_labels:
            raise MemorySelectionError("Expected the memory to carry soft logits recorded under the base model")
        base_weights = np.array(self.base_weights, dtype=float).reshape(-1)
        base_weights.setflags(write=False)
        object.__setattr__(self, 'base_weights', base_weights)
        if self.weight_div is None:
            object.__setattr__(self, 'model_map', None)
        elif self.model_map is None:
            raise_exception_if_invalid_shape(
                parameter_name='base_weights',
                array=base_weights,
                expected_shape=(self.num_params,),
            )
        else:
            model_map = np.array(self.model_map, dtype=float)
            raise_exception_if_invalid_shape(
                parameter_name='model_map',
                array=model_map,
                expected_shape=(self.num_params, base_weights.shape[0]),
            )
            model_map.setflags(write=False)
            object.__setattr__(self, 'model_map', model_map)

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={
                'memory_size': self.memory.size,
                'tau': self.tau,
                'weight_div': self.weight_div,
                'feature_map_new': self.feature_map_new,
                'mapped': self.model_map is not None,
            },
        )

    @property
    def num_params(self) -> int:
        return self.feature_map_new.output_dim

    @property
    def anchor(self) -> np.ndarray:
        """Base point of the weight-space term: w*, or A w* under a model map"""
        if self.model_map is None:
            return self.base_weights
        return self.model_map @ self.base_weights

    def memory_design_matrix(self) -> np.ndarray:
        return self.feature_map_new.design_matrix(inputs=self.memory.inputs)


def _validate_weights(spec: KPriorSpec, w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != spec.num_params:
        raise DimensionMismatchError(f"Expected `w` of length {spec.num_params}, but got {w.shape[0]}")
    return w


def kprior_value(
        spec: KPriorSpec,
        w: np.ndarray,
    ) -> float:
    w = _validate_weights(spec=spec, w=w)
    logits = spec.memory_design_matrix() @ w
    functional = float(np.sum(bregman_log_partition(family=spec.family, f1=logits, f2=spec.memory.soft_logits)))
    return functional + spec.tau * weight_divergence_value(divergence=spec.weight_div, w=w, anchor=spec.anchor)


def kprior_grad(
        spec: KPriorSpec,
        w: np.ndarray,
    ) -> np.ndarray:
    w = _validate_weights(spec=spec, w=w)
    design_matrix = spec.memory_design_matrix()
    residuals = spec.family.mean(design_matrix @ w) - spec.family.mean(spec.memory.soft_logits)
    weight_grad = weight_divergence_grad(divergence=spec.weight_div, w=w, anchor=spec.anchor)
    return design_matrix.T @ residuals + spec.tau * weight_grad


def kprior_value_and_grad(
        spec: KPriorSpec,
        w: np.ndarray,
    ) -> Tuple[float, np.ndarray]:
    return kprior_value(spec=spec, w=w), kprior_grad(spec=spec, w=w)


def raise_exception_if_memory_not_in_data(
        memory: MemorySet,
        data: LabeledData,
    ) -> None:
    """Raises MemorySelectionError unless every memory row is the row of `data` at the stored index"""
    if memory.size == 0:
        return None
    if memory.indices[-1] >= data.num_examples or memory.indices[0] < 0:
        raise MemorySelectionError(f"Memory indices fall outside the data's {data.num_examples} rows")
    if not np.array_equal(data.inputs[memory.indices], memory.inputs):
        raise MemorySelectionError("Memory inputs do not match the data rows at the stored indices")
    return None


def grad_reconstruction_error(
        spec: KPriorSpec,
        w: np.ndarray,
        full_data: LabeledData,
        delta: float,
    ) -> np.ndarray:
    """
    Returns e(w) = grad l(w) - grad K(w), where l is the full-data objective with L2 strength `delta`.
    This equals the functional-difference sum over the rows left out of the memory plus grad l(w*),
    which vanishes when w* is optimal.
    """
    raise_exception_if_memory_not_in_data(memory=spec.memory, data=full_data)
    w = _validate_weights(spec=spec, w=w)
    model = GlmModel(weights=w, feature_map=spec.feature_map_new, family=spec.family)
    return glm_gradient(model=model, data=full_data, delta=delta) - kprior_grad(spec=spec, w=w)


def leftover_ggn(
        base: GlmModel,
        full_data: LabeledData,
        memory: MemorySet,
    ) -> np.ndarray:
    """GGN matrix at w* summed over the rows of `full_data` that are not in the memory"""
    raise_exception_if_memory_not_in_data(memory=memory, data=full_data)
    leftover = full_data.drop(indices=memory.indices)
    return ggn_matrix(model=base, inputs=leftover.inputs)


def taylor_error_estimate(
        leftover_ggn: np.ndarray,
        w: np.ndarray,
        w_star: np.ndarray,
    ) -> np.ndarray:
    """First-order estimate G*(X \\ M) (w - w*) of the gradient-reconstruction error"""
    return np.asarray(leftover_ggn, dtype=float) @ (np.asarray(w, dtype=float) - np.asarray(w_star, dtype=float))


def weight_prior_quad(
        w: np.ndarray,
        w_star: np.ndarray,
        ggn_full: np.ndarray,
        delta: float,
    ) -> Tuple[float, np.ndarray]:
    """
    Quadratic weight-prior 1/2 (w - w*)^T [G + delta I] (w - w*) and its gradient [G + delta I](w - w*).
    Returns the tuple (value, grad).
    """
    shift = np.asarray(w, dtype=float) - np.asarray(w_star, dtype=float)
    grad = taylor_error_estimate(leftover_ggn=ggn_full, w=w, w_star=w_star) + delta * shift
    return 0.5 * float(shift @ grad), grad

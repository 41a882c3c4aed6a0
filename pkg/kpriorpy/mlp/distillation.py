"""
Knowledge distillation and K-priors for MLPs.

The distillation objective mixes hard-label and soft-label losses:

    lambda * sum_i l(y_i, h(f_w(x_i))) + (delta/2)||w||^2 + (1 - lambda) * T^2 * sum_i l(h(f*_i / T), h(f_w(x_i) / T))

with l(p, h(f)) = A(f) - p^T f. Both teacher and student logits are divided by the temperature T and the
soft term is scaled by T^2.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import softmax

from kpriorpy.core.exceptions import (
    DimensionMismatchError,
    MemorySelectionError,
    raise_exception_if_invalid_shape,
)
from kpriorpy.core.utils import create_string_repr
from kpriorpy.glm.models import LabeledData
from kpriorpy.kprior.divergences import (
    L2Shift,
    WeightDivergenceSpec,
    weight_divergence_grad,
    weight_divergence_value,
)
from kpriorpy.mlp.network import (
    MlpParams,
    MlpSpec,
    encode_targets,
    mlp_backward,
    mlp_forward,
    mlp_jacobian,
    output_log_partition,
    output_mean,
)


def softmax_with_temperature(
        logits: np.ndarray,
        temperature: float = 1.0,
    ) -> np.ndarray:
    """Row-wise softmax of logits / T"""
    _validate_temperature(temperature=temperature)
    return softmax(np.asarray(logits, dtype=float) / temperature, axis=-1)


def _validate_temperature(temperature: float) -> None:
    if not temperature > 0:
        raise ValueError(f"Expected temperature `T` > 0, but got {temperature}")
    return None


def _validate_mixing(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"Expected `lambda` in [0, 1], but got {lam}")
    return None


def _soft_targets_term(
        spec: MlpSpec,
        logits: np.ndarray,
        soft_logits: np.ndarray,
        temperature: float,
    ) -> Tuple[float, np.ndarray]:
    """T^2 * sum_i l(h(f*_i / T), h(f_i / T)) and its gradient T * [h(f_i / T) - h(f*_i / T)] in the logits"""
    targets = output_mean(spec=spec, logits=soft_logits, temperature=temperature)
    scaled = logits / temperature
    value = float(np.sum(output_log_partition(spec=spec, logits=scaled)) - np.sum(targets * scaled))
    grad = temperature * (output_mean(spec=spec, logits=logits, temperature=temperature) - targets)
    return temperature**2 * value, grad


def mlp_loss_grad(
        params: MlpParams,
        spec: MlpSpec,
        batch: LabeledData,
        soft_logits: Optional[np.ndarray] = None,
        lam: float = 1.0,
        temperature: float = 1.0,
        delta: float = 0.0,
    ) -> Tuple[float, np.ndarray]:
    """
    Distillation objective and its gradient over the flattened parameters.

    Parameters:
        - params (MlpParams): Student parameters.
        - spec (MlpSpec): Architecture.
        - batch (LabeledData): Inputs with hard labels (the labels are ignored when lam=0).
        - soft_logits (array): Teacher logits for the batch inputs (needed when lam < 1).
        - lam (float): Weight of the hard-label loss, in [0, 1].
        - temperature (float): T > 0.
        - delta (float): L2 strength (0 for plain distillation).

    Returns the tuple (value, grad).
    """
    _validate_temperature(temperature=temperature)
    _validate_mixing(lam=lam)
    logits = mlp_forward(params=params, spec=spec, x=batch.inputs)
    value = 0.0
    output_grads = np.zeros_like(logits)
    if lam > 0:
        targets = encode_targets(spec=spec, labels=batch.labels)
        value += lam * float(np.sum(output_log_partition(spec=spec, logits=logits)) - np.sum(targets * logits))
        output_grads = output_grads + lam * (output_mean(spec=spec, logits=logits) - targets)
    if lam < 1:
        if soft_logits is None:
            raise ValueError("Expected `soft_logits` when lambda < 1")
        soft_logits = np.asarray(soft_logits, dtype=float)
        raise_exception_if_invalid_shape(parameter_name='soft_logits', array=soft_logits, expected_shape=logits.shape)
        soft_value, soft_grad = _soft_targets_term(spec=spec, logits=logits, soft_logits=soft_logits, temperature=temperature)
        value += (1.0 - lam) * soft_value
        output_grads = output_grads + (1.0 - lam) * soft_grad
    flat = params.flatten()
    value += 0.5 * delta * float(flat @ flat)
    grad = mlp_backward(params=params, spec=spec, inputs=batch.inputs, output_grads=output_grads) + delta * flat
    return value, grad


def kd_leftover_identity_check(
        params_student: MlpParams,
        params_teacher: MlpParams,
        spec: MlpSpec,
        data: LabeledData,
        lam: float,
    ) -> float:
    """
    Relative difference between two computations of the distillation gradient (T=1, delta=0):
    (a) backpropagation of the objective, and (b) sum_i J_i^T [h(f_i) - y_i] - (1 - lambda) sum_i J_i^T r*_i
    with the teacher residuals r*_i = h(f*_i) - y_i, evaluated with explicit per-example Jacobians.
    """
    teacher_logits = mlp_forward(params=params_teacher, spec=spec, x=data.inputs)
    _, direct = mlp_loss_grad(
        params=params_student,
        spec=spec,
        batch=data,
        soft_logits=teacher_logits,
        lam=lam,
        temperature=1.0,
        delta=0.0,
    )
    targets = encode_targets(spec=spec, labels=data.labels).reshape(data.num_examples, spec.output_dim)
    student_residuals = output_mean(spec=spec, logits=mlp_forward(params=params_student, spec=spec, x=data.inputs)).reshape(data.num_examples, spec.output_dim) - targets
    teacher_residuals = output_mean(spec=spec, logits=teacher_logits).reshape(data.num_examples, spec.output_dim) - targets
    jacobian = mlp_jacobian(params=params_student, spec=spec, inputs=data.inputs)
    data_grad = np.einsum('nkp,nk->p', jacobian, student_residuals)
    leftover = np.einsum('nkp,nk->p', jacobian, teacher_residuals)
    reconstructed = data_grad - (1.0 - lam) * leftover
    scale = max(np.linalg.norm(direct), np.linalg.norm(reconstructed))
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(direct - reconstructed) / scale)


@dataclass(frozen=True)
class DeepKPriorSpec:
    """
    K-prior for an MLP:

        sum_{i in M} T^2 B_A(f_w(u_i) / T || f*_i / T) + tau * D_w(w || w*)

    `soft_logits` were recorded under the base parameters (possibly of another architecture); with
    `weight_div=None` (or no base weights) the prior is the functional term alone.
    """
    spec: MlpSpec
    memory_inputs: np.ndarray
    soft_logits: np.ndarray
    base_weights: Optional[np.ndarray] = None
    weight_div: WeightDivergenceSpec = None
    tau: float = 1.0
    temperature: float = 1.0

    def __post_init__(self) -> None:
        _validate_temperature(temperature=self.temperature)
        if not self.tau > 0:
            raise ValueError(f"Expected `tau` > 0, but got {self.tau}")
        memory_inputs = np.array(self.memory_inputs, dtype=float)
        soft_logits = np.array(self.soft_logits, dtype=float)
        raise_exception_if_invalid_shape(parameter_name='memory_inputs', array=memory_inputs, expected_shape=(None, self.spec.input_dim))
        if soft_logits.shape[0] != memory_inputs.shape[0] or not np.all(np.isfinite(soft_logits)):
            raise MemorySelectionError("Expected one finite soft logit per memory input")
        object.__setattr__(self, 'memory_inputs', memory_inputs)
        object.__setattr__(self, 'soft_logits', soft_logits)
        if self.weight_div is not None:
            if self.base_weights is None:
                raise ValueError("A weight-space divergence needs `base_weights`")
            base_weights = np.array(self.base_weights, dtype=float).reshape(-1)
            raise_exception_if_invalid_shape(parameter_name='base_weights', array=base_weights, expected_shape=(self.spec.num_params,))
            object.__setattr__(self, 'base_weights', base_weights)

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={
                'spec': self.spec,
                'memory_size': self.memory_inputs.shape[0],
                'weight_div': self.weight_div,
                'tau': self.tau,
                'temperature': self.temperature,
            },
        )


def _validate_flat(prior: DeepKPriorSpec, w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != prior.spec.num_params:
        raise DimensionMismatchError(f"Expected `w` of length {prior.spec.num_params}, but got {w.shape[0]}")
    return w


def deep_kprior_value(prior: DeepKPriorSpec, w: np.ndarray) -> float:
    w = _validate_flat(prior=prior, w=w)
    temperature = prior.temperature
    params = MlpParams.unflatten(spec=prior.spec, vector=w)
    scaled = mlp_forward(params=params, spec=prior.spec, x=prior.memory_inputs) / temperature
    scaled_star = prior.soft_logits / temperature
    mean_star = output_mean(spec=prior.spec, logits=scaled_star)
    bregman = (
        output_log_partition(spec=prior.spec, logits=scaled)
        - output_log_partition(spec=prior.spec, logits=scaled_star)
        - np.sum((mean_star * (scaled - scaled_star)).reshape(scaled.shape[0], prior.spec.output_dim), axis=-1)
    )
    value = temperature**2 * float(np.sum(np.maximum(bregman, 0.0)))
    if prior.weight_div is not None:
        value += prior.tau * weight_divergence_value(divergence=prior.weight_div, w=w, anchor=prior.base_weights)
    return value


def deep_kprior_grad(prior: DeepKPriorSpec, w: np.ndarray) -> np.ndarray:
    """sum_{i in M} J_i^T T [h(f_i / T) - h(f*_i / T)] + tau * grad D_w"""
    w = _validate_flat(prior=prior, w=w)
    params = MlpParams.unflatten(spec=prior.spec, vector=w)
    logits = mlp_forward(params=params, spec=prior.spec, x=prior.memory_inputs)
    output_grads = prior.temperature * (
        output_mean(spec=prior.spec, logits=logits, temperature=prior.temperature)
        - output_mean(spec=prior.spec, logits=prior.soft_logits, temperature=prior.temperature)
    )
    grad = mlp_backward(params=params, spec=prior.spec, inputs=prior.memory_inputs, output_grads=output_grads)
    if prior.weight_div is not None:
        grad = grad + prior.tau * weight_divergence_grad(divergence=prior.weight_div, w=w, anchor=prior.base_weights)
    return grad


def dl_kprior_grad(
        params: MlpParams,
        spec: MlpSpec,
        base_soft_logits: np.ndarray,
        memory_inputs: np.ndarray,
        w_star_flat: np.ndarray,
        delta: float,
        tau: float = 1.0,
    ) -> np.ndarray:
    """
    sum_{i in M} J_i^T [h(f_w(u_i)) - h(f*_i)] + tau * delta * (w - w*).
    With the full data as memory this equals grad l(w) - (sum_i J_i^T r*_i + delta w*).
    """
    prior = DeepKPriorSpec(
        spec=spec,
        memory_inputs=memory_inputs,
        soft_logits=base_soft_logits,
        base_weights=w_star_flat,
        weight_div=L2Shift(delta=delta),
        tau=tau,
    )
    return deep_kprior_grad(prior=prior, w=params.flatten())


def dl_kprior_value(
        params: MlpParams,
        spec: MlpSpec,
        base_soft_logits: np.ndarray,
        memory_inputs: np.ndarray,
        w_star_flat: np.ndarray,
        delta: float,
        tau: float = 1.0,
    ) -> float:
    prior = DeepKPriorSpec(
        spec=spec,
        memory_inputs=memory_inputs,
        soft_logits=base_soft_logits,
        base_weights=w_star_flat,
        weight_div=L2Shift(delta=delta),
        tau=tau,
    )
    return deep_kprior_value(prior=prior, w=params.flatten())

"""
Multilayer perceptron with hand-written backpropagation.

Layer l maps a_l -> z_l = a_l W_l + b_l, with W_l of shape (fan_in, fan_out). Hidden layers apply the
activation; the last layer is linear and gives the logits f_w(x). A sigmoid output has a single logit
per example (Bernoulli loss), a softmax output has K logits (categorical loss with log-partition
logsumexp). Parameters flatten to one vector in the order [W_0, b_0, W_1, b_1, ...] (row-major weights).
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.special import expit, logsumexp, softmax

from kpriorpy.core.exceptions import (
    DimensionMismatchError,
    InvalidDataError,
    raise_exception_if_invalid_option,
    raise_exception_if_invalid_shape,
)
from kpriorpy.core.random_ops import get_random_generator
from kpriorpy.core.utils import create_string_repr
from kpriorpy.memory.selection import multiclass_score

RELU = "relu"
TANH = "tanh"
ACTIVATIONS = [RELU, TANH]
SIGMOID_OUTPUT = "sigmoid"
SOFTMAX_OUTPUT = "softmax"
OUTPUTS = [SIGMOID_OUTPUT, SOFTMAX_OUTPUT]


@dataclass(frozen=True)
class MlpSpec:
    """
    Architecture of the network. `layer_sizes` runs input -> hidden... -> output; a sigmoid output
    needs an output size of 1, a softmax output one unit per class.

    >>> MlpSpec(layer_sizes=(2, 100, 1), activation='relu', output='sigmoid')
    """
    layer_sizes: Tuple[int, ...]
    activation: str = RELU
    output: str = SIGMOID_OUTPUT

    def __post_init__(self) -> None:
        object.__setattr__(self, 'layer_sizes', tuple(int(size) for size in self.layer_sizes))
        raise_exception_if_invalid_option(option_name='activation', option_value=self.activation, valid_option_values=ACTIVATIONS)
        raise_exception_if_invalid_option(option_name='output', option_value=self.output, valid_option_values=OUTPUTS)
        if len(self.layer_sizes) < 3:
            raise ValueError(f"Expected at least one hidden layer, but got layer sizes {self.layer_sizes}")
        if any(size < 1 for size in self.layer_sizes):
            raise ValueError(f"Expected positive layer sizes, but got {self.layer_sizes}")
        if self.output == SIGMOID_OUTPUT and self.layer_sizes[-1] != 1:
            raise ValueError(f"A sigmoid output needs 1 output unit, but got {self.layer_sizes[-1]}")
        if self.output == SOFTMAX_OUTPUT and self.layer_sizes[-1] < 2:
            raise ValueError(f"A softmax output needs >= 2 output units, but got {self.layer_sizes[-1]}")

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={'layer_sizes': self.layer_sizes, 'activation': self.activation, 'output': self.output},
        )

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    @property
    def num_layers(self) -> int:
        return len(self.layer_sizes) - 1

    @property
    def layer_shapes(self) -> List[Tuple[int, int]]:
        return list(zip(self.layer_sizes[:-1], self.layer_sizes[1:]))

    @property
    def num_params(self) -> int:
        return sum(fan_in * fan_out + fan_out for fan_in, fan_out in self.layer_shapes)


@dataclass(frozen=True)
class MlpParams:
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]

    def flatten(self) -> np.ndarray:
        blocks = []
        for weight, bias in zip(self.weights, self.biases):
            blocks.extend([np.ravel(weight), np.ravel(bias)])
        return np.concatenate(blocks).astype(float)

    @classmethod
    def unflatten(cls, spec: MlpSpec, vector: np.ndarray) -> "MlpParams":
        vector = np.asarray(vector, dtype=float).reshape(-1)
        if vector.shape[0] != spec.num_params:
            raise DimensionMismatchError(f"Expected {spec.num_params} parameters for {spec}, but got {vector.shape[0]}")
        weights, biases = [], []
        offset = 0
        for fan_in, fan_out in spec.layer_shapes:
            weights.append(vector[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out))
            offset += fan_in * fan_out
            biases.append(vector[offset:offset + fan_out])
            offset += fan_out
        return cls(weights=tuple(weights), biases=tuple(biases))


def init_params(spec: MlpSpec, seed: int) -> MlpParams:
    """Glorot-uniform weights in +/- sqrt(6 / (fan_in + fan_out)) and zero biases, drawn with a PCG64 generator"""
    rng = get_random_generator(seed=seed)
    weights, biases = [], []
    for fan_in, fan_out in spec.layer_shapes:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(low=-limit, high=limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights=tuple(weights), biases=tuple(biases))


def __activate(activation: str, z: np.ndarray) -> np.ndarray:
    if activation == RELU:
        return np.maximum(z, 0.0)
    return np.tanh(z)


def __activation_derivative(activation: str, z: np.ndarray) -> np.ndarray:
    # relu subgradient at 0 is 0
    if activation == RELU:
        return (z > 0).astype(float)
    return 1.0 - np.tanh(z)**2


def _forward_cache(
        params: MlpParams,
        spec: MlpSpec,
        inputs: np.ndarray,
    ) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Returns (activations, pre_activations): activations[l] is the input of layer l, pre_activations[l] its output"""
    inputs = np.asarray(inputs, dtype=float)
    raise_exception_if_invalid_shape(parameter_name='inputs', array=inputs, expected_shape=(None, spec.input_dim))
    activations = [inputs]
    pre_activations = []
    for layer, (weight, bias) in enumerate(zip(params.weights, params.biases)):
        z = activations[-1] @ weight + bias
        pre_activations.append(z)
        if layer < spec.num_layers - 1:
            activations.append(__activate(activation=spec.activation, z=z))
    return activations, pre_activations


def _as_output_matrix(spec: MlpSpec, logits: np.ndarray) -> np.ndarray:
    return logits.reshape(-1, spec.output_dim)


def _squeeze_output(spec: MlpSpec, logits: np.ndarray) -> np.ndarray:
    return logits[:, 0] if spec.output == SIGMOID_OUTPUT else logits


def mlp_forward(
        params: MlpParams,
        spec: MlpSpec,
        x: np.ndarray,
    ) -> np.ndarray:
    """Logits for the N x D inputs `x`: shape (N,) for a sigmoid output, (N, K) for a softmax output"""
    _, pre_activations = _forward_cache(params=params, spec=spec, inputs=x)
    return _squeeze_output(spec=spec, logits=pre_activations[-1])


def _backward_deltas(
        params: MlpParams,
        spec: MlpSpec,
        pre_activations: List[np.ndarray],
        output_grads: np.ndarray,
    ) -> List[np.ndarray]:
    """Per-layer error signals dL/dz_l, from the output-layer gradient dL/df"""
    deltas = [_as_output_matrix(spec=spec, logits=np.asarray(output_grads, dtype=float))]
    for layer in range(spec.num_layers - 1, 0, -1):
        upstream = deltas[0] @ params.weights[layer].T
        deltas.insert(0, upstream * __activation_derivative(activation=spec.activation, z=pre_activations[layer - 1]))
    return deltas


def mlp_backward(
        params: MlpParams,
        spec: MlpSpec,
        inputs: np.ndarray,
        output_grads: np.ndarray,
    ) -> np.ndarray:
    """Returns sum_i J_i^T g_i as a flattened vector, where J_i = df_w(x_i)/dw and g_i = output_grads[i]"""
    activations, pre_activations = _forward_cache(params=params, spec=spec, inputs=inputs)
    deltas = _backward_deltas(params=params, spec=spec, pre_activations=pre_activations, output_grads=output_grads)
    blocks = []
    for activation, delta in zip(activations, deltas):
        blocks.extend([np.ravel(activation.T @ delta), delta.sum(axis=0)])
    return np.concatenate(blocks)


def mlp_jacobian(
        params: MlpParams,
        spec: MlpSpec,
        inputs: np.ndarray,
    ) -> np.ndarray:
    """Per-example Jacobians of the logits, shape (N, output_dim, P)"""
    activations, pre_activations = _forward_cache(params=params, spec=spec, inputs=inputs)
    num_examples = activations[0].shape[0]
    jacobian = np.zeros((num_examples, spec.output_dim, spec.num_params))
    for unit in range(spec.output_dim):
        output_grads = np.zeros((num_examples, spec.output_dim))
        output_grads[:, unit] = 1.0
        deltas = _backward_deltas(params=params, spec=spec, pre_activations=pre_activations, output_grads=output_grads)
        blocks = []
        for activation, delta in zip(activations, deltas):
            blocks.extend([np.einsum('ni,nj->nij', activation, delta).reshape(num_examples, activation.shape[1] * delta.shape[1]), delta])
        jacobian[:, unit, :] = np.hstack(blocks)
    return jacobian


def output_mean(
        spec: MlpSpec,
        logits: np.ndarray,
        temperature: float = 1.0,
    ) -> np.ndarray:
    """h(f / T): sigmoid probabilities, or softmax rows that sum to 1"""
    scaled = np.asarray(logits, dtype=float) / temperature
    if spec.output == SIGMOID_OUTPUT:
        return expit(scaled)
    return softmax(scaled, axis=-1)


def output_log_partition(spec: MlpSpec, logits: np.ndarray) -> np.ndarray:
    """A(f) per example: softplus for a sigmoid output, logsumexp for a softmax output"""
    logits = np.asarray(logits, dtype=float)
    if spec.output == SIGMOID_OUTPUT:
        return np.logaddexp(0.0, logits)
    return logsumexp(logits, axis=-1)


def encode_targets(spec: MlpSpec, labels: np.ndarray) -> np.ndarray:
    """Labels as expectation parameters: {0, 1} floats for a sigmoid output, one-hot rows for a softmax output"""
    labels = np.asarray(labels, dtype=float).reshape(-1)
    if spec.output == SIGMOID_OUTPUT:
        if not np.all(np.isin(labels, [0.0, 1.0])):
            raise InvalidDataError("Expected labels in {0, 1} for a sigmoid output")
        return labels
    classes = np.arange(spec.output_dim, dtype=float)
    if not np.all(np.isin(labels, classes)):
        raise InvalidDataError(f"Expected class labels in 0..{spec.output_dim - 1} for a softmax output")
    return (labels[:, None] == classes[None, :]).astype(float)


def output_curvature(spec: MlpSpec, logits: np.ndarray) -> np.ndarray:
    """Lambda(f) per example: h'(f) with shape (N, 1, 1) or diag(p) - pp^T with shape (N, K, K)"""
    probabilities = _as_output_matrix(spec=spec, logits=output_mean(spec=spec, logits=logits))
    if spec.output == SIGMOID_OUTPUT:
        return (probabilities * (1.0 - probabilities))[:, :, None]
    return np.einsum('nk,kl->nkl', probabilities, np.eye(spec.output_dim)) - np.einsum('nk,nl->nkl', probabilities, probabilities)


def mlp_ggn(
        params: MlpParams,
        spec: MlpSpec,
        inputs: np.ndarray,
    ) -> np.ndarray:
    """Generalized Gauss-Newton matrix sum_i J_i^T Lambda(f_i) J_i (P x P)"""
    jacobian = mlp_jacobian(params=params, spec=spec, inputs=inputs)
    logits = mlp_forward(params=params, spec=spec, x=inputs)
    curvature = output_curvature(spec=spec, logits=logits)
    ggn = np.einsum('nkp,nkl,nlq->pq', jacobian, curvature, jacobian)
    return 0.5 * (ggn + ggn.T)


@dataclass(frozen=True)
class MlpModel:
    """An MLP with fixed flattened weights. Mirrors the GlmModel interface used by memory selection and evaluation."""
    weights: np.ndarray
    spec: MlpSpec

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=float).reshape(-1)
        raise_exception_if_invalid_shape(parameter_name='weights', array=weights, expected_shape=(self.spec.num_params,))
        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)

    def __str__(self) -> str:
        return create_string_repr(instance=self, kwargs_dict={'spec': self.spec})

    @property
    def params(self) -> MlpParams:
        return MlpParams.unflatten(spec=self.spec, vector=self.weights)

    def with_weights(self, weights: np.ndarray) -> "MlpModel":
        return MlpModel(weights=weights, spec=self.spec)

    def logits(self, inputs: np.ndarray) -> np.ndarray:
        return mlp_forward(params=self.params, spec=self.spec, x=inputs)

    def selection_scores(self, logits: np.ndarray) -> np.ndarray:
        """h'(f) for a sigmoid output, 1 - sum_k p_k^2 for a softmax output"""
        probabilities = output_mean(spec=self.spec, logits=logits)
        if self.spec.output == SIGMOID_OUTPUT:
            return probabilities * (1.0 - probabilities)
        return multiclass_score(probabilities=probabilities)


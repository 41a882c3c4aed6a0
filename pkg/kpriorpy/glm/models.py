from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from kpriorpy.core.exceptions import (
    DimensionMismatchError,
    raise_exception_if_invalid_shape,
)
from kpriorpy.core.utils import create_string_repr
from kpriorpy.glm.families import ExpFamily
from kpriorpy.glm.features import FeatureMap
from kpriorpy.optim.quasi_newton import (
    OptimizerConfig,
    OptimResult,
    minimize,
)


@dataclass(frozen=True)
class LabeledData:
    """N x D inputs with N labels. Arrays are copied to float64 and made read-only on construction."""
    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        inputs = np.array(self.inputs, dtype=float)
        labels = np.array(self.labels, dtype=float).reshape(-1)
        if inputs.ndim != 2:
            raise DimensionMismatchError(f"Expected `inputs` to be a 2-D matrix, but got shape {inputs.shape}")
        if inputs.shape[0] != labels.shape[0]:
            raise DimensionMismatchError(
                f"Expected as many labels as input rows, but got {labels.shape[0]} labels and {inputs.shape[0]} rows"
            )
        inputs.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, 'inputs', inputs)
        object.__setattr__(self, 'labels', labels)

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={'num_examples': self.num_examples, 'input_dim': self.input_dim},
        )

    def __len__(self) -> int:
        return self.num_examples

    @property
    def num_examples(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.inputs.shape[1])

    @classmethod
    def empty(cls, input_dim: int) -> "LabeledData":
        return cls(inputs=np.zeros((0, input_dim)), labels=np.zeros(0))

    def take(self, indices: Sequence[int]) -> "LabeledData":
        """Returns the rows at `indices` (in the given order)"""
        indices = np.asarray(indices, dtype=int)
        return LabeledData(inputs=self.inputs[indices], labels=self.labels[indices])

    def drop(self, indices: Sequence[int]) -> "LabeledData":
        """Returns the data without the rows at `indices` (remaining rows keep their relative order)"""
        keep = np.ones(self.num_examples, dtype=bool)
        keep[np.asarray(indices, dtype=int)] = False
        return LabeledData(inputs=self.inputs[keep], labels=self.labels[keep])

    def concat(self, other: "LabeledData") -> "LabeledData":
        if other.input_dim != self.input_dim:
            raise DimensionMismatchError(f"Cannot concatenate data of input dims {self.input_dim} and {other.input_dim}")
        return LabeledData(
            inputs=np.vstack([self.inputs, other.inputs]),
            labels=np.concatenate([self.labels, other.labels]),
        )


@dataclass(frozen=True)
class GlmModel:
    """Generalized linear model f_w(x) = phi(x)^T w with a canonical-link exponential family"""
    weights: np.ndarray
    feature_map: FeatureMap
    family: ExpFamily

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=float).reshape(-1)
        raise_exception_if_invalid_shape(
            parameter_name='weights',
            array=weights,
            expected_shape=(self.feature_map.output_dim,),
        )
        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={'feature_map': self.feature_map, 'family': self.family.kind},
        )

    def with_weights(self, weights: np.ndarray) -> "GlmModel":
        return GlmModel(weights=weights, feature_map=self.feature_map, family=self.family)

    def logits(self, inputs: np.ndarray) -> np.ndarray:
        return self.feature_map.design_matrix(inputs=inputs) @ self.weights

    def selection_scores(self, logits: np.ndarray) -> np.ndarray:
        """Per-example curvature h'(f), used to rank memory candidates"""
        return self.family.mean_derivative(logits)


def glm_objective(
        model: GlmModel,
        data: LabeledData,
        delta: float,
    ) -> float:
    """Returns sum_i [A(f_i) - y_i f_i] + (delta/2) ||w||^2, with f_i = phi(x_i)^T w"""
    logits = model.logits(inputs=data.inputs)
    data_term = float(np.sum(model.family.loss(data.labels, logits)))
    return data_term + 0.5 * delta * float(model.weights @ model.weights)


def glm_gradient(
        model: GlmModel,
        data: LabeledData,
        delta: float,
    ) -> np.ndarray:
    """Returns sum_i phi_i [h(f_i) - y_i] + delta w"""
    design_matrix = model.feature_map.design_matrix(inputs=data.inputs)
    residuals = model.family.mean(design_matrix @ model.weights) - data.labels
    return design_matrix.T @ residuals + delta * model.weights


def ggn_matrix(
        model: GlmModel,
        inputs: np.ndarray,
    ) -> np.ndarray:
    """
    Generalized Gauss-Newton matrix sum_i phi_i h'(f_i) phi_i^T at the model's weights.
    An empty `inputs` matrix gives the P x P zero matrix.
    """
    design_matrix = model.feature_map.design_matrix(inputs=inputs)
    curvatures = model.family.mean_derivative(design_matrix @ model.weights)
    ggn = design_matrix.T @ (curvatures[:, None] * design_matrix)
    return 0.5 * (ggn + ggn.T)


def glm_value_and_gradient(
        model: GlmModel,
        data: LabeledData,
        delta: float,
        weights: Optional[np.ndarray] = None,
    ) -> Tuple[float, np.ndarray]:
    """Returns (glm_objective, glm_gradient) evaluated at `weights` (defaults to the model's own weights)"""
    if weights is not None:
        model = model.with_weights(weights=weights)
    return glm_objective(model=model, data=data, delta=delta), glm_gradient(model=model, data=data, delta=delta)


def fit_glm(
        feature_map: FeatureMap,
        family: ExpFamily,
        data: LabeledData,
        delta: float,
        cfg: Optional[OptimizerConfig] = None,
        w0: Optional[np.ndarray] = None,
    ) -> Tuple[GlmModel, OptimResult]:
    """
    Trains a GLM to convergence on `data` with the L2 regularizer (delta/2)||w||^2.
    Returns the tuple (GlmModel, OptimResult).
    """
    family.validate_labels(labels=data.labels)
    template = GlmModel(weights=np.zeros(feature_map.output_dim), feature_map=feature_map, family=family)
    w0 = template.weights if w0 is None else w0
    result = minimize(
        objective_and_gradient=lambda w: glm_value_and_gradient(model=template, data=data, delta=delta, weights=w),
        w0=w0,
        cfg=cfg,
        cost_per_eval=max(data.num_examples, 1),
    )
    return template.with_weights(weights=result.weights), result

from dataclasses import dataclass

import numpy as np

from kpriorpy.core.exceptions import (
    DimensionMismatchError,
    raise_exception_if_invalid_type,
)
from kpriorpy.core.utils import create_string_repr


@dataclass(frozen=True)
class FeatureMap:
    """
    Polynomial basis with per-coordinate powers (no cross terms).
    Layout of phi(x): [1 (if include_bias), x_1..x_D, x_1^2..x_D^2, ..., x_1^degree..x_D^degree].
    The degree-(d-1) output is always a prefix of the degree-d output.
    """
    degree: int
    input_dim: int
    include_bias: bool = True

    def __post_init__(self) -> None:
        raise_exception_if_invalid_type(parameter_name='degree', parameter_value=self.degree, expected_type=(int, np.integer))
        raise_exception_if_invalid_type(parameter_name='input_dim', parameter_value=self.input_dim, expected_type=(int, np.integer))
        if self.degree < 1:
            raise ValueError(f"Expected `degree` to be >= 1, but got {self.degree}")
        if self.input_dim < 0:
            raise ValueError(f"Expected `input_dim` to be >= 0, but got {self.input_dim}")

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={'degree': self.degree, 'input_dim': self.input_dim, 'include_bias': self.include_bias},
        )

    @property
    def output_dim(self) -> int:
        return int(self.include_bias) + self.input_dim * self.degree

    def design_matrix(self, inputs: np.ndarray) -> np.ndarray:
        """Expands every row of the N x D matrix `inputs`, returning the N x P design matrix"""
        inputs = np.asarray(inputs, dtype=float)
        if inputs.ndim != 2 or inputs.shape[1] != self.input_dim:
            raise DimensionMismatchError(
                f"Expected inputs of shape (N, {self.input_dim}), but got shape {inputs.shape}"
            )
        blocks = [np.ones((inputs.shape[0], 1))] if self.include_bias else []
        blocks.extend([inputs**power for power in range(1, self.degree + 1)])
        if not blocks:
            return np.zeros((inputs.shape[0], 0))
        return np.hstack(blocks)


def features_expand(
        feature_map: FeatureMap,
        x: np.ndarray,
    ) -> np.ndarray:
    """
    Expands a single input vector.

    >>> features_expand(feature_map=FeatureMap(degree=2, input_dim=2), x=np.array([2.0, 3.0])) # Returns [1, 2, 3, 4, 9]
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != feature_map.input_dim:
        raise DimensionMismatchError(
            f"Expected `x` of length {feature_map.input_dim}, but got shape {x.shape}"
        )
    return feature_map.design_matrix(inputs=x.reshape(1, -1))[0]


def is_nested(
        new_map: FeatureMap,
        old_map: FeatureMap,
    ) -> bool:
    """True if one map's output is a prefix of the other's (same inputs and bias, any degrees)"""
    return new_map.input_dim == old_map.input_dim and new_map.include_bias == old_map.include_bias


def prefix_projection(
        new_map: FeatureMap,
        old_map: FeatureMap,
    ) -> np.ndarray:
    """
    Returns the P_new x P_old matrix A that is the identity on the shared prefix of the two nested maps.
    For a smaller new map, A drops the trailing coordinates of the old weights; for a larger one it pads
    them with zeros.
    """
    if not is_nested(new_map=new_map, old_map=old_map):
        raise DimensionMismatchError(f"Feature maps {new_map} and {old_map} are not nested")
    return np.eye(new_map.output_dim, old_map.output_dim)

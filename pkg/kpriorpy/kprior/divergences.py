"""
Weight-space divergences D_w(w || w*) used by the K-prior.

- `L2Shift(delta)` is (delta/2) ||w - anchor||^2.
- `TwoGenerator(gamma_new, delta_old)` is the Bregman divergence built from two L2 regularizers,
  G(w) = (gamma_new/2)||w||^2 for the new model and R(w) = (delta_old/2)||w||^2 for the old one:
  G(w) + R*(eta*) - w^T eta*, with eta* = grad R(anchor) = delta_old * anchor and R* the convex conjugate of R.
  Its gradient is gamma_new * w - delta_old * anchor.
- `None` means the prior has no weight-space term.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from kpriorpy.core.exceptions import DimensionMismatchError
from kpriorpy.core.utils import create_string_repr


@dataclass(frozen=True)
class L2Shift:
    delta: float

    def __post_init__(self) -> None:
        if not self.delta >= 0:
            raise ValueError(f"Expected `delta` >= 0, but got {self.delta}")

    def __str__(self) -> str:
        return create_string_repr(instance=self, kwargs_dict={'delta': self.delta})


@dataclass(frozen=True)
class TwoGenerator:
    gamma_new: float
    delta_old: float

    def __post_init__(self) -> None:
        if not self.gamma_new >= 0 or not self.delta_old >= 0:
            raise ValueError(
                f"Expected non-negative coefficients, but got gamma_new={self.gamma_new}, delta_old={self.delta_old}"
            )

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={'gamma_new': self.gamma_new, 'delta_old': self.delta_old},
        )


WeightDivergenceSpec = Optional[Union[L2Shift, TwoGenerator]]


def _check_dims(w: np.ndarray, anchor: np.ndarray) -> None:
    if w.shape != anchor.shape:
        raise DimensionMismatchError(f"Expected `w` and `anchor` of equal shape, but got {w.shape} and {anchor.shape}")
    return None


def weight_divergence_value(
        divergence: WeightDivergenceSpec,
        w: np.ndarray,
        anchor: np.ndarray,
    ) -> float:
    w = np.asarray(w, dtype=float)
    if divergence is None:
        return 0.0
    anchor = np.asarray(anchor, dtype=float)
    _check_dims(w=w, anchor=anchor)
    if isinstance(divergence, L2Shift):
        shift = w - anchor
        return 0.5 * divergence.delta * float(shift @ shift)
    # R*(eta*) = (delta_old/2) ||anchor||^2 for the L2 generator
    return (
        0.5 * divergence.gamma_new * float(w @ w)
        + 0.5 * divergence.delta_old * float(anchor @ anchor)
        - divergence.delta_old * float(w @ anchor)
    )


def weight_divergence_grad(
        divergence: WeightDivergenceSpec,
        w: np.ndarray,
        anchor: np.ndarray,
    ) -> np.ndarray:
    """Gradient in `w`: delta (w - anchor) for L2Shift, gamma_new w - delta_old anchor for TwoGenerator"""
    w = np.asarray(w, dtype=float)
    if divergence is None:
        return np.zeros_like(w)
    anchor = np.asarray(anchor, dtype=float)
    _check_dims(w=w, anchor=anchor)
    if isinstance(divergence, L2Shift):
        return divergence.delta * (w - anchor)
    return divergence.gamma_new * w - divergence.delta_old * anchor

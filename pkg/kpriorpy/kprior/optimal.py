"""
Optimal K-prior built from the thin SVD Phi^T = U diag(S) V^T of the full design matrix.

Keeping the top-m singular triplets gives the gradient U_{1:m} S_{1:m} V_{1:m}^T d + delta (w - w*),
where d_i = h(f_w(x_i)) - h(f_{w*}(x_i)) over the full data. With m = K the gradient of the full-memory
K-prior is recovered exactly; for m < K the error is the norm of the discarded tail.
This needs the full data set, so it is a diagnostic construct rather than a practical prior.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from kpriorpy.core.exceptions import (
    DimensionMismatchError,
    SingularMatrixError,
    raise_exception_if_non_finite,
)
from kpriorpy.core.utils import create_string_repr
from kpriorpy.glm.families import ExpFamily
from kpriorpy.glm.features import FeatureMap
from kpriorpy.glm.models import LabeledData

RANK_TOLERANCE = 1e-10
SINGULAR_TOLERANCE = 1e-14


@dataclass(frozen=True)
class SvdBasis:
    """Thin SVD of Phi^T (P x N): U is P x K, S holds K descending singular values, V is N x K"""
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    def __str__(self) -> str:
        return create_string_repr(instance=self, kwargs_dict={'P': self.U.shape[0], 'N': self.V.shape[0], 'K': self.K})

    @property
    def K(self) -> int:
        return int(self.S.shape[0])


def svd_basis(design_matrix: np.ndarray) -> SvdBasis:
    """
    Thin SVD of the transposed N x P design matrix, keeping the singular values > 1e-10 * s_max.

    >>> svd_basis(design_matrix=np.array([[3.0, 0.0], [0.0, 2.0]])).S # Returns [3, 2]
    """
    design_matrix = np.asarray(design_matrix, dtype=float)
    raise_exception_if_non_finite(parameter_name='design_matrix', value=design_matrix)
    num_examples, num_params = design_matrix.shape
    if min(num_examples, num_params) == 0:
        return SvdBasis(U=np.zeros((num_params, 0)), S=np.zeros(0), V=np.zeros((num_examples, 0)))
    U, S, Vt = linalg.svd(design_matrix.T, full_matrices=False, lapack_driver='gesdd')
    rank = int(np.sum(S > RANK_TOLERANCE * S[0])) if S[0] > 0 else 0
    return SvdBasis(U=U[:, :rank], S=S[:rank], V=Vt[:rank].T)


def _validate_rank(basis: SvdBasis, m: int) -> None:
    if m < 0 or m > basis.K:
        raise DimensionMismatchError(f"Expected 0 <= m <= K={basis.K}, but got m={m}")
    return None


def prediction_differences(
        w: np.ndarray,
        w_star: np.ndarray,
        full_data: LabeledData,
        family: ExpFamily,
        feature_map: FeatureMap,
    ) -> np.ndarray:
    """d_i = h(f_w(x_i)) - h(f_{w*}(x_i)) over every row of `full_data`"""
    design_matrix = feature_map.design_matrix(inputs=full_data.inputs)
    return family.mean(design_matrix @ np.asarray(w, dtype=float)) - family.mean(design_matrix @ np.asarray(w_star, dtype=float))


def optimal_kprior_grad(
        basis: SvdBasis,
        m: int,
        w: np.ndarray,
        w_star: np.ndarray,
        delta: float,
        full_data: LabeledData,
        family: ExpFamily,
        feature_map: FeatureMap,
    ) -> np.ndarray:
    _validate_rank(basis=basis, m=m)
    differences = prediction_differences(w=w, w_star=w_star, full_data=full_data, family=family, feature_map=feature_map)
    coefficients = basis.S[:m] * (basis.V[:, :m].T @ differences)
    return basis.U[:, :m] @ coefficients + delta * (np.asarray(w, dtype=float) - np.asarray(w_star, dtype=float))


def optimal_error_norm(
        basis: SvdBasis,
        m: int,
        w: np.ndarray,
        w_star: np.ndarray,
        full_data: LabeledData,
        family: ExpFamily,
        feature_map: FeatureMap,
    ) -> float:
    """Returns sqrt(sum_{j > m} s_j^2 a_j^2) with a = V^T d, the gradient error of keeping m singular triplets"""
    _validate_rank(basis=basis, m=m)
    differences = prediction_differences(w=w, w_star=w_star, full_data=full_data, family=family, feature_map=feature_map)
    tail = basis.S[m:] * (basis.V[:, m:].T @ differences)
    return float(np.sqrt(np.sum(tail**2)))


def optimal_kprior_weights(
        basis: SvdBasis,
        m: int,
        w: np.ndarray,
        w_star: np.ndarray,
        full_data: LabeledData,
        family: ExpFamily,
        feature_map: FeatureMap,
    ) -> np.ndarray:
    """
    Per-direction weights beta = D_u^{-1} S V^T d of the optimal K-prior, where the memory "inputs" are the
    columns u_j of U and D_u = diag(h(u_j^T w) - h(u_j^T w*)). The weights depend on w.
    Raises SingularMatrixError if some diagonal entry of D_u is zero.
    """
    _validate_rank(basis=basis, m=m)
    differences = prediction_differences(w=w, w_star=w_star, full_data=full_data, family=family, feature_map=feature_map)
    directions = basis.U[:, :m]
    diagonal = family.mean(directions.T @ np.asarray(w, dtype=float)) - family.mean(directions.T @ np.asarray(w_star, dtype=float))
    if np.any(np.abs(diagonal) <= SINGULAR_TOLERANCE):
        raise SingularMatrixError("D_u has a zero diagonal entry, so the optimal K-prior weights are undefined")
    return basis.S[:m] * (basis.V[:, :m].T @ differences) / diagonal

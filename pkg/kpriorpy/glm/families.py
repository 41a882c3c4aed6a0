"""
Scalar exponential-family losses ell(y, f) = A(f) - y*f.

Each family is identified by its log-partition A, its mean mapping h = dA/df and the derivative h'.
All evaluations are vectorised over numpy arrays of natural parameters f.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.special import expit

from kpriorpy.core.exceptions import (
    InvalidDataError,
    raise_exception_if_invalid_option,
    raise_exception_if_non_finite,
)
from kpriorpy.core.utils import create_string_repr

ArrayOrFloat = Union[np.ndarray, float]

BERNOULLI_LOGIT = "bernoulli"
GAUSSIAN_IDENTITY = "gaussian"
POISSON_LOG = "poisson"
FAMILY_KINDS = [BERNOULLI_LOGIT, GAUSSIAN_IDENTITY, POISSON_LOG]


@dataclass(frozen=True)
class ExpFamily:
    """Exponential family with a canonical link. Options for `kind` are: ['bernoulli', 'gaussian', 'poisson']"""
    kind: str

    def __post_init__(self) -> None:
        raise_exception_if_invalid_option(
            option_name='kind',
            option_value=self.kind,
            valid_option_values=FAMILY_KINDS,
        )

    def __str__(self) -> str:
        return create_string_repr(instance=self, kwargs_dict={'kind': self.kind})

    def log_partition(self, f: ArrayOrFloat) -> ArrayOrFloat:
        f = np.asarray(f, dtype=float)
        if self.kind == BERNOULLI_LOGIT:
            return np.maximum(f, 0.0) + np.log1p(np.exp(-np.abs(f)))
        if self.kind == GAUSSIAN_IDENTITY:
            return 0.5 * f**2
        return np.exp(f)

    def mean(self, f: ArrayOrFloat) -> ArrayOrFloat:
        """The mean mapping h(f) = dA/df"""
        f = np.asarray(f, dtype=float)
        if self.kind == BERNOULLI_LOGIT:
            return expit(f)
        if self.kind == GAUSSIAN_IDENTITY:
            return f.copy()
        return np.exp(f)

    def mean_derivative(self, f: ArrayOrFloat) -> ArrayOrFloat:
        """h'(f), which is the per-example curvature of the loss"""
        f = np.asarray(f, dtype=float)
        if self.kind == BERNOULLI_LOGIT:
            h = expit(f)
            return h * (1.0 - h)
        if self.kind == GAUSSIAN_IDENTITY:
            return np.ones_like(f)
        return np.exp(f)

    def loss(self, y: ArrayOrFloat, f: ArrayOrFloat) -> ArrayOrFloat:
        """Per-example loss A(f) - y*f (negative log-likelihood up to a term that only depends on y)"""
        return self.log_partition(f) - np.asarray(y, dtype=float) * np.asarray(f, dtype=float)

    def validate_labels(self, labels: np.ndarray) -> None:
        """Raises InvalidDataError if `labels` are outside the family's support; otherwise returns None"""
        labels = np.asarray(labels, dtype=float)
        if not np.all(np.isfinite(labels)):
            raise InvalidDataError("Expected labels to be finite")
        if self.kind == BERNOULLI_LOGIT and not np.all(np.isin(labels, [0.0, 1.0])):
            raise InvalidDataError("Expected Bernoulli labels to be in {0, 1}")
        if self.kind == POISSON_LOG and not np.all((labels >= 0) & (labels == np.floor(labels))):
            raise InvalidDataError("Expected Poisson labels to be non-negative integers")
        return None


def family_eval(
        family: ExpFamily,
        f: ArrayOrFloat,
    ) -> Tuple[ArrayOrFloat, ArrayOrFloat, ArrayOrFloat]:
    """
    Returns the tuple (A(f), h(f), h'(f)).

    >>> family_eval(family=ExpFamily(kind='bernoulli'), f=0.0) # Returns (ln 2, 0.5, 0.25)
    """
    raise_exception_if_non_finite(parameter_name='f', value=f)
    return family.log_partition(f), family.mean(f), family.mean_derivative(f)


def bregman_log_partition(
        family: ExpFamily,
        f1: ArrayOrFloat,
        f2: ArrayOrFloat,
    ) -> ArrayOrFloat:
    """
    Bregman divergence generated by the log-partition: A(f1) - A(f2) - h(f2)*(f1 - f2).
    Its derivative in f1 is h(f1) - h(f2). Tiny negative round-off is clipped to 0.
    """
    raise_exception_if_non_finite(parameter_name='f1', value=f1)
    raise_exception_if_non_finite(parameter_name='f2', value=f2)
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    divergence = family.log_partition(f1) - family.log_partition(f2) - family.mean(f2) * (f1 - f2)
    return np.maximum(divergence, 0.0)

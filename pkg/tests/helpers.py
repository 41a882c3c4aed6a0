from typing import Tuple

import numpy as np

from kpriorpy.glm.families import BERNOULLI_LOGIT, ExpFamily
from kpriorpy.glm.features import FeatureMap
from kpriorpy.glm.models import LabeledData


def make_logistic_data(
        seed: int,
        num_examples: int = 40,
        input_dim: int = 3,
    ) -> LabeledData:
    """Gaussian inputs with labels drawn from a random logistic model"""
    rng = np.random.default_rng(seed)
    inputs = rng.normal(size=(num_examples, input_dim))
    true_w = rng.normal(size=input_dim)
    probabilities = 1.0 / (1.0 + np.exp(-(inputs @ true_w)))
    labels = (rng.uniform(size=num_examples) < probabilities).astype(float)
    return LabeledData(inputs=inputs, labels=labels)

def make_logistic_problem(
        seed: int,
        num_examples: int = 40,
        input_dim: int = 3,
        degree: int = 2,
    ) -> Tuple[LabeledData, FeatureMap, ExpFamily]:
    data = make_logistic_data(seed=seed, num_examples=num_examples, input_dim=input_dim)
    return data, FeatureMap(degree=degree, input_dim=input_dim), ExpFamily(kind=BERNOULLI_LOGIT)

def central_differences(func, w: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Gradient of the scalar function `func` at `w` by central finite differences"""
    w = np.asarray(w, dtype=float)
    grad = np.zeros_like(w)
    for idx in range(w.shape[0]):
        shift = np.zeros_like(w)
        shift[idx] = step
        grad[idx] = (func(w + shift) - func(w - shift)) / (2 * step)
    return grad


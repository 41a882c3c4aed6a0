from typing import Tuple

import numpy as np
import pytest

from helpers import make_logistic_problem
from kpriorpy.glm.families import BERNOULLI_LOGIT, ExpFamily
from kpriorpy.glm.features import FeatureMap
from kpriorpy.glm.models import LabeledData


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture
def bernoulli() -> ExpFamily:
    return ExpFamily(kind=BERNOULLI_LOGIT)


@pytest.fixture
def logistic_problem() -> Tuple[LabeledData, FeatureMap, ExpFamily]:
    return make_logistic_problem(seed=0)

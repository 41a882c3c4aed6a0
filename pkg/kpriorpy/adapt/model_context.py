"""
Model-agnostic view of a model class, so that the adaptation methods work the same way for GLMs and MLPs.
A context knows how to evaluate the summed data loss, the K-prior, the GGN and hard predictions for
flattened weight vectors of its model class.
"""

from abc import ABC, abstractmethod
from typing import Optional, Tuple, Union

import numpy as np

from kpriorpy.core.exceptions import DimensionMismatchError, InvalidDataError
from kpriorpy.core.random_ops import get_random_generator
from kpriorpy.core.type_annotations import Oracle
from kpriorpy.core.utils import create_string_repr
from kpriorpy.glm.families import BERNOULLI_LOGIT, ExpFamily
from kpriorpy.glm.features import FeatureMap
from kpriorpy.glm.models import (
    GlmModel,
    LabeledData,
    ggn_matrix,
    glm_value_and_gradient,
)
from kpriorpy.kprior.divergences import WeightDivergenceSpec
from kpriorpy.kprior.priors import KPriorSpec, kprior_value_and_grad
from kpriorpy.memory.selection import MemorySet
from kpriorpy.mlp.distillation import (
    DeepKPriorSpec,
    deep_kprior_grad,
    deep_kprior_value,
    mlp_loss_grad,
)
from kpriorpy.mlp.network import (
    SIGMOID_OUTPUT,
    MlpModel,
    MlpParams,
    MlpSpec,
    encode_targets,
    init_params,
    mlp_ggn,
)

Model = Union[GlmModel, MlpModel]


class ModelContext(ABC):
    """Evaluates objectives of one model class at flattened weight vectors"""

    @property
    @abstractmethod
    def num_params(self) -> int:
        pass

    @abstractmethod
    def make_model(self, w: np.ndarray) -> Model:
        pass

    @abstractmethod
    def data_value_and_grad(self, w: np.ndarray, data: LabeledData) -> Tuple[float, np.ndarray]:
        """Summed loss sum_i l(y_i, h(f_w(x_i))) over `data` (no regularizer) and its gradient"""
        pass

    @abstractmethod
    def kprior_oracle(
            self,
            base_weights: np.ndarray,
            memory: MemorySet,
            weight_div: WeightDivergenceSpec,
            tau: float = 1.0,
            model_map: Optional[np.ndarray] = None,
            temperature: float = 1.0,
        ) -> Oracle:
        """Oracle w -> (K(w), grad K(w)) for a K-prior whose memory soft logits came from the base model"""
        pass

    @abstractmethod
    def ggn(self, w: np.ndarray, inputs: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def initial_weights(self, seed: Optional[int] = None) -> np.ndarray:
        """Starting point for training from scratch: deterministic when `seed` is None"""
        pass

    @abstractmethod
    def validate_labels(self, labels: np.ndarray) -> None:
        pass

    @property
    @abstractmethod
    def is_classifier(self) -> bool:
        pass

    def logits(self, w: np.ndarray, inputs: np.ndarray) -> np.ndarray:
        return self.make_model(w=w).logits(inputs)

    def predict_labels(self, w: np.ndarray, inputs: np.ndarray) -> np.ndarray:
        """Hard predictions: p > 0.5 (ties to class 0) for a single logit, argmax (ties to the smaller class) otherwise"""
        if not self.is_classifier:
            raise InvalidDataError("Hard predictions are only defined for classification models")
        logits = self.logits(w=w, inputs=inputs)
        if logits.ndim == 1:
            return (logits > 0).astype(float)
        return np.argmax(logits, axis=-1).astype(float)

    def accuracy(self, w: np.ndarray, data: LabeledData) -> float:
        if data.num_examples == 0:
            return float('nan')
        return float(np.mean(self.predict_labels(w=w, inputs=data.inputs) == data.labels))

    def _validate_weights(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float).reshape(-1)
        if w.shape[0] != self.num_params:
            raise DimensionMismatchError(f"Expected weights of length {self.num_params}, but got {w.shape[0]}")
        return w


class GlmContext(ModelContext):
    def __init__(self, feature_map: FeatureMap, family: ExpFamily) -> None:
        self.feature_map = feature_map
        self.family = family
        self.__template = GlmModel(weights=np.zeros(feature_map.output_dim), feature_map=feature_map, family=family)

    def __str__(self) -> str:
        return create_string_repr(instance=self, kwargs_dict={'feature_map': self.feature_map, 'family': self.family.kind})

    @property
    def num_params(self) -> int:
        return self.feature_map.output_dim

    @property
    def is_classifier(self) -> bool:
        return self.family.kind == BERNOULLI_LOGIT

    def make_model(self, w: np.ndarray) -> GlmModel:
        return self.__template.with_weights(weights=self._validate_weights(w=w))

    def data_value_and_grad(self, w: np.ndarray, data: LabeledData) -> Tuple[float, np.ndarray]:
        return glm_value_and_gradient(model=self.__template, data=data, delta=0.0, weights=self._validate_weights(w=w))

    def kprior_oracle(
            self,
            base_weights: np.ndarray,
            memory: MemorySet,
            weight_div: WeightDivergenceSpec,
            tau: float = 1.0,
            model_map: Optional[np.ndarray] = None,
            temperature: float = 1.0,
        ) -> Oracle:
        if temperature != 1.0:
            raise ValueError("A temperature other than 1 is only supported for MLP K-priors")
        spec = KPriorSpec(
            base_weights=base_weights,
            memory=memory,
            weight_div=weight_div,
            family=self.family,
            feature_map_new=self.feature_map,
            tau=tau,
            model_map=model_map,
        )
        return lambda w: kprior_value_and_grad(spec=spec, w=w)

    def ggn(self, w: np.ndarray, inputs: np.ndarray) -> np.ndarray:
        return ggn_matrix(model=self.make_model(w=w), inputs=inputs)

    def initial_weights(self, seed: Optional[int] = None) -> np.ndarray:
        if seed is None:
            return np.zeros(self.num_params)
        return get_random_generator(seed=seed).standard_normal(self.num_params)

    def validate_labels(self, labels: np.ndarray) -> None:
        self.family.validate_labels(labels=labels)
        return None


class MlpContext(ModelContext):
    def __init__(self, spec: MlpSpec, init_seed: int = 0) -> None:
        self.spec = spec
        self.init_seed = init_seed

    def __str__(self) -> str:
        return create_string_repr(instance=self, kwargs_dict={'spec': self.spec, 'init_seed': self.init_seed})

    @property
    def num_params(self) -> int:
        return self.spec.num_params

    @property
    def is_classifier(self) -> bool:
        return True

    def make_model(self, w: np.ndarray) -> MlpModel:
        return MlpModel(weights=self._validate_weights(w=w), spec=self.spec)

    def data_value_and_grad(self, w: np.ndarray, data: LabeledData) -> Tuple[float, np.ndarray]:
        params = MlpParams.unflatten(spec=self.spec, vector=self._validate_weights(w=w))
        return mlp_loss_grad(params=params, spec=self.spec, batch=data, lam=1.0, delta=0.0)

    def kprior_oracle(
            self,
            base_weights: np.ndarray,
            memory: MemorySet,
            weight_div: WeightDivergenceSpec,
            tau: float = 1.0,
            model_map: Optional[np.ndarray] = None,
            temperature: float = 1.0,
        ) -> Oracle:
        if model_map is not None:
            raise ValueError("MLP K-priors do not support a model map; use weight_div=None across architectures")
        soft_logits = memory.soft_logits
        if self.spec.output != SIGMOID_OUTPUT:
            soft_logits = soft_logits.reshape(memory.size, self.spec.output_dim)
        prior = DeepKPriorSpec(
            spec=self.spec,
            memory_inputs=memory.inputs,
            soft_logits=soft_logits,
            base_weights=base_weights if weight_div is not None else None,
            weight_div=weight_div,
            tau=tau,
            temperature=temperature,
        )
        return lambda w: (deep_kprior_value(prior=prior, w=w), deep_kprior_grad(prior=prior, w=w))

    def ggn(self, w: np.ndarray, inputs: np.ndarray) -> np.ndarray:
        params = MlpParams.unflatten(spec=self.spec, vector=self._validate_weights(w=w))
        return mlp_ggn(params=params, spec=self.spec, inputs=inputs)

    def initial_weights(self, seed: Optional[int] = None) -> np.ndarray:
        seed = self.init_seed if seed is None else seed
        return init_params(spec=self.spec, seed=seed).flatten()

    def validate_labels(self, labels: np.ndarray) -> None:
        encode_targets(spec=self.spec, labels=labels)
        return None


def make_context(
        architecture: Union[FeatureMap, MlpSpec],
        family: Optional[ExpFamily] = None,
        init_seed: int = 0,
    ) -> ModelContext:
    """GlmContext for a FeatureMap (Bernoulli unless `family` is given), MlpContext for an MlpSpec"""
    if isinstance(architecture, FeatureMap):
        return GlmContext(feature_map=architecture, family=ExpFamily(kind=BERNOULLI_LOGIT) if family is None else family)
    return MlpContext(spec=architecture, init_seed=init_seed)

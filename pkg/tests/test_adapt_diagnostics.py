import numpy as np
import pytest

from kpriorpy.adapt.diagnostics import distance_to_batch, equal_cost_memory_size, stale_mean_diagnostic
from kpriorpy.adapt.model_context import GlmContext, make_context
from kpriorpy.core.exceptions import DimensionMismatchError, InvalidDataError
from kpriorpy.glm.families import BERNOULLI_LOGIT, GAUSSIAN_IDENTITY, ExpFamily
from kpriorpy.glm.features import FeatureMap
from kpriorpy.glm.models import GlmModel, LabeledData
from kpriorpy.mlp.network import MlpSpec


@pytest.fixture
def line_context():
    return GlmContext(feature_map=FeatureMap(degree=1, input_dim=1, include_bias=False), family=ExpFamily(kind=BERNOULLI_LOGIT))


class TestDistanceToBatch:
    def test_norms_and_disagreement(self, line_context):
        eval_data = LabeledData(inputs=[[1.0], [-1.0], [2.0], [-3.0]], labels=[1, 0, 1, 0])
        linf, l2, disagreement = distance_to_batch(w_a=np.array([1.0]), w_b=np.array([-2.0]), eval_data=eval_data, model_ctx=line_context)
        assert (linf, l2) == (3.0, 3.0)
        assert disagreement == 1.0

    def test_identical_weights(self, line_context):
        eval_data = LabeledData(inputs=[[1.0], [-1.0]], labels=[1, 0])
        assert distance_to_batch(w_a=np.array([0.5]), w_b=np.array([0.5]), eval_data=eval_data, model_ctx=line_context) == (0.0, 0.0, 0.0)

    def test_empty_eval_data_has_no_disagreement(self, line_context):
        result = distance_to_batch(w_a=np.array([0.5]), w_b=np.array([1.5]), eval_data=LabeledData.empty(input_dim=1), model_ctx=line_context)
        assert result == (1.0, 1.0, 0.0)

    def test_length_mismatch_raises(self, line_context):
        with pytest.raises(DimensionMismatchError):
            distance_to_batch(w_a=np.zeros(1), w_b=np.zeros(2), eval_data=LabeledData.empty(input_dim=1), model_ctx=line_context)

    def test_regression_models_have_no_hard_predictions(self):
        context = GlmContext(feature_map=FeatureMap(degree=1, input_dim=1), family=ExpFamily(kind=GAUSSIAN_IDENTITY))
        with pytest.raises(InvalidDataError):
            distance_to_batch(w_a=np.zeros(2), w_b=np.ones(2), eval_data=LabeledData(inputs=[[1.0]], labels=[0.3]), model_ctx=context)


class TestPredictions:
    def test_zero_logit_predicts_class_zero(self, line_context):
        np.testing.assert_array_equal(line_context.predict_labels(w=np.array([1.0]), inputs=np.array([[0.0], [0.1]])), [0.0, 1.0])

    def test_softmax_ties_go_to_the_smaller_class(self):
        context = make_context(architecture=MlpSpec(layer_sizes=(2, 3, 3), output="softmax"))
        predictions = context.predict_labels(w=np.zeros(context.num_params), inputs=np.ones((2, 2)))
        np.testing.assert_array_equal(predictions, [0.0, 0.0])


class TestStaleMeanDiagnostic:
    def test_pairs_curvatures_at_both_weights(self):
        base = GlmModel(
            weights=np.array([0.0]),
            feature_map=FeatureMap(degree=1, input_dim=1, include_bias=False),
            family=ExpFamily(kind=BERNOULLI_LOGIT),
        )
        pairs = stale_mean_diagnostic(base=base, candidate_w=np.array([2.0]), data=LabeledData(inputs=[[0.0], [1.0]], labels=[0, 1]))
        assert pairs[0] == (0.25, 0.25)
        assert pairs[1][0] == 0.25
        assert pairs[1][1] == pytest.approx(0.104994, abs=1e-6)


def test_equal_cost_memory_size():
    assert equal_cost_memory_size(num_params=7, input_dim=2) == 10
    assert equal_cost_memory_size(num_params=1, input_dim=1) == 1

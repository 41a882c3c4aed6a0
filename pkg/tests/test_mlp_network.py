import numpy as np
import pytest

from helpers import central_differences
from kpriorpy.core.exceptions import DimensionMismatchError, InvalidDataError, InvalidOptionError
from kpriorpy.glm.models import LabeledData
from kpriorpy.mlp.distillation import mlp_loss_grad
from kpriorpy.mlp.network import (
    MlpModel,
    MlpParams,
    MlpSpec,
    encode_targets,
    init_params,
    mlp_backward,
    mlp_forward,
    mlp_ggn,
    mlp_jacobian,
    output_mean,
)


@pytest.fixture
def sigmoid_spec():
    return MlpSpec(layer_sizes=(2, 5, 3, 1), activation="tanh", output="sigmoid")


@pytest.fixture
def softmax_spec():
    return MlpSpec(layer_sizes=(3, 4, 3), activation="tanh", output="softmax")


class TestMlpSpec:
    def test_num_params(self):
        assert MlpSpec(layer_sizes=(2, 100, 1)).num_params == 2 * 100 + 100 + 100 + 1

    @pytest.mark.parametrize("layer_sizes, output", [
        ((2, 1), "sigmoid"),
        ((2, 4, 2), "sigmoid"),
        ((2, 4, 1), "softmax"),
        ((2, 0, 1), "sigmoid"),
    ])
    def test_invalid_architectures_raise(self, layer_sizes, output):
        with pytest.raises(ValueError):
            MlpSpec(layer_sizes=layer_sizes, output=output)

    def test_unknown_activation_raises(self):
        with pytest.raises(InvalidOptionError):
            MlpSpec(layer_sizes=(2, 3, 1), activation="gelu")


class TestParams:
    def test_flatten_order(self):
        spec = MlpSpec(layer_sizes=(1, 2, 1))
        params = MlpParams.unflatten(spec=spec, vector=np.arange(7.0))
        np.testing.assert_array_equal(params.weights[0], [[0.0, 1.0]])
        np.testing.assert_array_equal(params.biases[0], [2.0, 3.0])
        np.testing.assert_array_equal(params.weights[1], [[4.0], [5.0]])
        np.testing.assert_array_equal(params.flatten(), np.arange(7.0))

    def test_wrong_length_raises(self, sigmoid_spec):
        with pytest.raises(DimensionMismatchError):
            MlpParams.unflatten(spec=sigmoid_spec, vector=np.zeros(3))

    def test_init_is_seeded_and_bounded(self, sigmoid_spec):
        first = init_params(spec=sigmoid_spec, seed=7)
        second = init_params(spec=sigmoid_spec, seed=7)
        np.testing.assert_array_equal(first.flatten(), second.flatten())
        assert np.all(np.abs(first.weights[0]) <= np.sqrt(6.0 / 7.0))
        assert all(np.all(bias == 0.0) for bias in first.biases)


class TestForwardBackward:
    def test_forward_shapes(self, sigmoid_spec, softmax_spec, rng):
        assert mlp_forward(params=init_params(spec=sigmoid_spec, seed=0), spec=sigmoid_spec, x=rng.normal(size=(6, 2))).shape == (6,)
        assert mlp_forward(params=init_params(spec=softmax_spec, seed=0), spec=softmax_spec, x=rng.normal(size=(6, 3))).shape == (6, 3)

    def test_relu_forward_by_hand(self):
        spec = MlpSpec(layer_sizes=(1, 2, 1), activation="relu")
        params = MlpParams.unflatten(spec=spec, vector=np.array([1.0, -1.0, 0.0, 0.0, 2.0, 3.0, 0.5]))
        np.testing.assert_allclose(mlp_forward(params=params, spec=spec, x=np.array([[2.0], [-1.0]])), [4.5, 3.5])

    @pytest.mark.parametrize("spec_name", ["sigmoid_spec", "softmax_spec"])
    def test_loss_gradient_matches_finite_differences(self, spec_name, request, rng):
        spec = request.getfixturevalue(spec_name)
        classes = 2 if spec.output == "sigmoid" else spec.output_dim
        batch = LabeledData(inputs=rng.normal(size=(8, spec.input_dim)), labels=rng.integers(0, classes, size=8))
        params = init_params(spec=spec, seed=1)
        oracle = lambda w: mlp_loss_grad(params=MlpParams.unflatten(spec=spec, vector=w), spec=spec, batch=batch, delta=0.3)
        _, grad = oracle(params.flatten())
        numerical = central_differences(func=lambda w: oracle(w)[0], w=params.flatten())
        np.testing.assert_allclose(grad, numerical, rtol=1e-5, atol=1e-6)

    def test_backward_matches_the_jacobian(self, softmax_spec, rng):
        params = init_params(spec=softmax_spec, seed=2)
        inputs = rng.normal(size=(5, 3))
        output_grads = rng.normal(size=(5, 3))
        jacobian = mlp_jacobian(params=params, spec=softmax_spec, inputs=inputs)
        expected = np.einsum('nkp,nk->p', jacobian, output_grads)
        np.testing.assert_allclose(mlp_backward(params=params, spec=softmax_spec, inputs=inputs, output_grads=output_grads), expected, atol=1e-12)

    def test_jacobian_of_no_inputs_is_empty(self, softmax_spec):
        jacobian = mlp_jacobian(params=init_params(spec=softmax_spec, seed=2), spec=softmax_spec, inputs=np.zeros((0, 3)))
        assert jacobian.shape == (0, 3, softmax_spec.num_params)

    def test_jacobian_matches_finite_differences(self, sigmoid_spec, rng):
        params = init_params(spec=sigmoid_spec, seed=3)
        x = rng.normal(size=(1, 2))
        numerical = central_differences(
            func=lambda w: float(mlp_forward(params=MlpParams.unflatten(spec=sigmoid_spec, vector=w), spec=sigmoid_spec, x=x)[0]),
            w=params.flatten(),
        )
        np.testing.assert_allclose(mlp_jacobian(params=params, spec=sigmoid_spec, inputs=x)[0, 0], numerical, rtol=1e-5, atol=1e-7)


class TestOutputs:
    def test_softmax_rows_sum_to_one(self, softmax_spec, rng):
        probabilities = output_mean(spec=softmax_spec, logits=rng.normal(size=(10, 3)) * 5, temperature=2.5)
        np.testing.assert_allclose(probabilities.sum(axis=1), 1.0, atol=1e-12)

    def test_encode_targets(self, softmax_spec, sigmoid_spec):
        np.testing.assert_array_equal(encode_targets(spec=softmax_spec, labels=np.array([2, 0])), [[0, 0, 1], [1, 0, 0]])
        with pytest.raises(InvalidDataError):
            encode_targets(spec=softmax_spec, labels=np.array([3]))
        with pytest.raises(InvalidDataError):
            encode_targets(spec=sigmoid_spec, labels=np.array([2]))

    def test_ggn_is_symmetric_and_positive_semidefinite(self, softmax_spec, rng):
        ggn = mlp_ggn(params=init_params(spec=softmax_spec, seed=4), spec=softmax_spec, inputs=rng.normal(size=(6, 3)))
        np.testing.assert_allclose(ggn, ggn.T)
        assert np.min(np.linalg.eigvalsh(ggn)) >= -1e-10


class TestMlpModel:
    def test_scores_follow_the_output(self, sigmoid_spec, softmax_spec, rng):
        inputs = rng.normal(size=(4, 2))
        model = MlpModel(weights=init_params(spec=sigmoid_spec, seed=0).flatten(), spec=sigmoid_spec)
        probabilities = output_mean(spec=sigmoid_spec, logits=model.logits(inputs))
        np.testing.assert_allclose(model.selection_scores(model.logits(inputs)), probabilities * (1 - probabilities))
        softmax_model = MlpModel(weights=np.zeros(softmax_spec.num_params), spec=softmax_spec)
        scores = softmax_model.selection_scores(softmax_model.logits(rng.normal(size=(2, 3))))
        np.testing.assert_allclose(scores, 2.0 / 3.0)

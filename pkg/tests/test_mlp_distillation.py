import numpy as np
import pytest

from helpers import central_differences
from kpriorpy.core.exceptions import MemorySelectionError
from kpriorpy.glm.models import LabeledData
from kpriorpy.kprior.divergences import L2Shift, weight_divergence_grad, weight_divergence_value
from kpriorpy.mlp.distillation import (
    DeepKPriorSpec,
    deep_kprior_grad,
    deep_kprior_value,
    dl_kprior_grad,
    kd_leftover_identity_check,
    mlp_loss_grad,
    softmax_with_temperature,
)
from kpriorpy.mlp.network import (
    MlpParams,
    MlpSpec,
    encode_targets,
    init_params,
    mlp_forward,
    mlp_jacobian,
    output_mean,
)


@pytest.fixture
def softmax_problem(rng):
    spec = MlpSpec(layer_sizes=(2, 6, 3), activation="tanh", output="softmax")
    data = LabeledData(inputs=rng.normal(size=(12, 2)), labels=rng.integers(0, 3, size=12))
    return spec, data


class TestSoftmaxWithTemperature:
    def test_rows_sum_to_one(self, rng):
        probabilities = softmax_with_temperature(logits=rng.normal(size=(5, 4)), temperature=3.0)
        np.testing.assert_allclose(probabilities.sum(axis=1), 1.0, atol=1e-12)

    def test_high_temperature_flattens(self):
        probabilities = softmax_with_temperature(logits=np.array([0.0, 10.0]), temperature=1e6)
        np.testing.assert_allclose(probabilities, [0.5, 0.5], atol=1e-5)

    def test_non_positive_temperature_raises(self):
        with pytest.raises(ValueError):
            softmax_with_temperature(logits=np.zeros(2), temperature=0.0)


class TestMlpLossGrad:
    @pytest.mark.parametrize("lam, temperature", [(0.0, 1.0), (0.5, 2.0), (1.0, 1.0)])
    def test_gradient_matches_finite_differences(self, softmax_problem, lam, temperature):
        spec, data = softmax_problem
        soft_logits = mlp_forward(params=init_params(spec=spec, seed=9), spec=spec, x=data.inputs)
        oracle = lambda w: mlp_loss_grad(
            params=MlpParams.unflatten(spec=spec, vector=w),
            spec=spec,
            batch=data,
            soft_logits=soft_logits,
            lam=lam,
            temperature=temperature,
            delta=0.1,
        )
        w = init_params(spec=spec, seed=1).flatten()
        numerical = central_differences(func=lambda v: oracle(v)[0], w=w)
        np.testing.assert_allclose(oracle(w)[1], numerical, rtol=1e-5, atol=1e-6)

    def test_soft_term_vanishes_at_the_teacher(self, softmax_problem):
        spec, data = softmax_problem
        params = init_params(spec=spec, seed=2)
        soft_logits = mlp_forward(params=params, spec=spec, x=data.inputs)
        _, grad = mlp_loss_grad(params=params, spec=spec, batch=data, soft_logits=soft_logits, lam=0.0, temperature=4.0)
        np.testing.assert_allclose(grad, 0.0, atol=1e-12)

    def test_missing_soft_logits_raise(self, softmax_problem):
        spec, data = softmax_problem
        with pytest.raises(ValueError):
            mlp_loss_grad(params=init_params(spec=spec, seed=0), spec=spec, batch=data, lam=0.5)

    def test_mixing_out_of_range_raises(self, softmax_problem):
        spec, data = softmax_problem
        with pytest.raises(ValueError):
            mlp_loss_grad(params=init_params(spec=spec, seed=0), spec=spec, batch=data, lam=1.5)


class TestKdIdentity:
    @pytest.mark.parametrize("lam", [0.0, 0.3, 1.0])
    def test_leftover_decomposition_holds(self, softmax_problem, lam):
        spec, data = softmax_problem
        error = kd_leftover_identity_check(
            params_student=init_params(spec=spec, seed=1),
            params_teacher=init_params(spec=spec, seed=2),
            spec=spec,
            data=data,
            lam=lam,
        )
        assert error <= 1e-8

    def test_sigmoid_output(self, rng):
        spec = MlpSpec(layer_sizes=(2, 5, 1), activation="relu", output="sigmoid")
        data = LabeledData(inputs=rng.normal(size=(10, 2)), labels=rng.integers(0, 2, size=10))
        error = kd_leftover_identity_check(
            params_student=init_params(spec=spec, seed=3),
            params_teacher=init_params(spec=spec, seed=4),
            spec=spec,
            data=data,
            lam=0.5,
        )
        assert error <= 1e-8

    def test_empty_data_gives_zero(self, softmax_problem):
        spec, _ = softmax_problem
        error = kd_leftover_identity_check(
            params_student=init_params(spec=spec, seed=1),
            params_teacher=init_params(spec=spec, seed=2),
            spec=spec,
            data=LabeledData.empty(input_dim=2),
            lam=0.5,
        )
        assert error == 0.0


class TestDeepKPrior:
    def test_vanishes_at_the_base(self, softmax_problem):
        spec, data = softmax_problem
        base = init_params(spec=spec, seed=5).flatten()
        prior = DeepKPriorSpec(
            spec=spec,
            memory_inputs=data.inputs[:6],
            soft_logits=mlp_forward(params=MlpParams.unflatten(spec=spec, vector=base), spec=spec, x=data.inputs[:6]),
            base_weights=base,
            weight_div=L2Shift(delta=1.0),
        )
        assert deep_kprior_value(prior=prior, w=base) == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(deep_kprior_grad(prior=prior, w=base), 0.0, atol=1e-12)

    @pytest.mark.parametrize("temperature", [1.0, 3.0])
    def test_gradient_matches_finite_differences(self, softmax_problem, temperature):
        spec, data = softmax_problem
        base = init_params(spec=spec, seed=5).flatten()
        prior = DeepKPriorSpec(
            spec=spec,
            memory_inputs=data.inputs,
            soft_logits=mlp_forward(params=MlpParams.unflatten(spec=spec, vector=base), spec=spec, x=data.inputs),
            base_weights=base,
            weight_div=L2Shift(delta=0.5),
            tau=2.0,
            temperature=temperature,
        )
        w = init_params(spec=spec, seed=6).flatten()
        numerical = central_differences(func=lambda v: deep_kprior_value(prior=prior, w=v), w=w)
        np.testing.assert_allclose(deep_kprior_grad(prior=prior, w=w), numerical, rtol=1e-5, atol=1e-6)

    def test_full_memory_reconstructs_the_past_gradient(self, softmax_problem):
        spec, data = softmax_problem
        base = init_params(spec=spec, seed=5)
        student = init_params(spec=spec, seed=8)
        delta = 0.2
        grad = dl_kprior_grad(
            params=student,
            spec=spec,
            base_soft_logits=mlp_forward(params=base, spec=spec, x=data.inputs),
            memory_inputs=data.inputs,
            w_star_flat=base.flatten(),
            delta=delta,
        )
        _, grad_student = mlp_loss_grad(params=student, spec=spec, batch=data, delta=delta)
        expected = grad_student - _base_residuals_through_student(spec=spec, student=student, base=base, data=data) - delta * base.flatten()
        np.testing.assert_allclose(grad, expected, atol=1e-10)

    @pytest.mark.parametrize("layer_sizes, output, soft_shape", [((2, 3, 1), "sigmoid", (0,)), ((2, 4, 3), "softmax", (0, 3))])
    def test_empty_memory_leaves_only_the_weight_term(self, layer_sizes, output, soft_shape):
        spec = MlpSpec(layer_sizes=layer_sizes, activation="tanh", output=output)
        base = init_params(spec=spec, seed=0).flatten()
        w = init_params(spec=spec, seed=1).flatten()
        functional_only = DeepKPriorSpec(spec=spec, memory_inputs=np.zeros((0, 2)), soft_logits=np.zeros(soft_shape))
        assert deep_kprior_value(prior=functional_only, w=w) == 0.0
        np.testing.assert_array_equal(deep_kprior_grad(prior=functional_only, w=w), np.zeros(spec.num_params))

        divergence = L2Shift(delta=0.7)
        prior = DeepKPriorSpec(
            spec=spec,
            memory_inputs=np.zeros((0, 2)),
            soft_logits=np.zeros(soft_shape),
            base_weights=base,
            weight_div=divergence,
            tau=2.0,
        )
        expected_value = 2.0 * weight_divergence_value(divergence=divergence, w=w, anchor=base)
        expected_grad = 2.0 * weight_divergence_grad(divergence=divergence, w=w, anchor=base)
        assert deep_kprior_value(prior=prior, w=w) == pytest.approx(expected_value, rel=1e-12)
        np.testing.assert_allclose(deep_kprior_grad(prior=prior, w=w), expected_grad, atol=1e-12)

    def test_mismatched_soft_logits_raise(self, softmax_problem):
        spec, data = softmax_problem
        with pytest.raises(MemorySelectionError):
            DeepKPriorSpec(spec=spec, memory_inputs=data.inputs, soft_logits=np.zeros((3, 3)))

    def test_weight_divergence_needs_base_weights(self, softmax_problem):
        spec, data = softmax_problem
        with pytest.raises(ValueError):
            DeepKPriorSpec(spec=spec, memory_inputs=data.inputs, soft_logits=np.zeros((12, 3)), weight_div=L2Shift(delta=1.0))


def _base_residuals_through_student(spec, student, base, data):
    """sum_i J_i^T [h(f*_i) - y_i] with the Jacobians taken at the student"""
    targets = encode_targets(spec=spec, labels=data.labels)
    residuals = output_mean(spec=spec, logits=mlp_forward(params=base, spec=spec, x=data.inputs)) - targets
    return np.einsum('nkp,nk->p', mlp_jacobian(params=student, spec=spec, inputs=data.inputs), residuals)

import numpy as np
import pytest

from helpers import make_logistic_problem
from kpriorpy.adapt.model_context import GlmContext
from kpriorpy.adapt.objectives import (
    batch_objective,
    kprior_objective,
    replay_objective,
    weight_prior_objective,
)
from kpriorpy.adapt.tasks import AddData, ChangeRegularizer, RemoveData, plan_task
from kpriorpy.core.exceptions import UnsupportedTaskError
from kpriorpy.glm.models import GlmModel, glm_objective
from kpriorpy.kprior.divergences import L2Shift
from kpriorpy.memory.selection import select_memorable


@pytest.fixture
def setting(rng):
    data, feature_map, family = make_logistic_problem(seed=2, num_examples=30)
    old, new = data.take(indices=range(20)), data.take(indices=range(20, 30))
    context = GlmContext(feature_map=feature_map, family=family)
    base = GlmModel(weights=rng.normal(size=feature_map.output_dim), feature_map=feature_map, family=family)
    return old, new, context, base


class TestBatchObjective:
    def test_matches_the_glm_objective_on_the_final_data(self, setting, rng):
        old, new, context, base = setting
        plan = plan_task(task=AddData(new=new), old_data=old, delta_old=1.5)
        w = rng.normal(size=context.num_params)
        value, _ = batch_objective(context=context, plan=plan)(w)
        np.testing.assert_allclose(value, glm_objective(model=base.with_weights(weights=w), data=plan.final_data, delta=1.5), rtol=1e-12)

    def test_uses_the_new_regularizer(self, setting):
        old, _, context, _ = setting
        plan = plan_task(task=ChangeRegularizer(delta_new=4.0), old_data=old, delta_old=1.0)
        w = np.ones(context.num_params)
        _, grad = batch_objective(context=context, plan=plan)(w)
        _, grad_data = context.data_value_and_grad(w=w, data=old)
        np.testing.assert_allclose(grad - grad_data, 4.0 * w)


class TestMinibatch:
    def test_all_rows_give_the_full_objective(self, setting, rng):
        old, new, context, base = setting
        plan = plan_task(task=AddData(new=new), old_data=old, delta_old=1.0)
        memory = select_memorable(model=base, data=old, m=8)
        objective = kprior_objective(
            context=context,
            plan=plan,
            base_weights=base.weights,
            memory=memory,
            weight_div=L2Shift(delta=1.0),
            anchor=base.weights,
            kd_lambda=0.25,
        )
        w = rng.normal(size=context.num_params)
        full_value, full_grad = objective(w)
        value, grad = objective.minibatch(w, np.arange(objective.num_examples))
        np.testing.assert_allclose(value, full_value, rtol=1e-12)
        np.testing.assert_allclose(grad, full_grad, rtol=1e-10, atol=1e-12)
        assert objective.num_examples == 10 + 8 + 8

    def test_estimate_is_unbiased_over_a_partition(self, setting, rng):
        old, new, context, _ = setting
        objective = batch_objective(context=context, plan=plan_task(task=AddData(new=new), old_data=old, delta_old=1.0))
        w = rng.normal(size=context.num_params)
        halves = [np.arange(0, 15), np.arange(15, 30)]
        estimates = [objective.minibatch(w, rows)[1] for rows in halves]
        np.testing.assert_allclose(0.5 * (estimates[0] + estimates[1]), objective(w)[1], rtol=1e-10, atol=1e-12)


class TestKPriorObjective:
    def test_removed_rows_enter_with_a_negative_sign(self, setting, rng):
        old, _, context, base = setting
        plan = plan_task(task=RemoveData(indices=[0, 1]), old_data=old, delta_old=1.0)
        memory = select_memorable(model=base, data=old, m=old.num_examples)
        objective = kprior_objective(
            context=context, plan=plan, base_weights=base.weights, memory=memory, weight_div=None, anchor=None,
        )
        w = rng.normal(size=context.num_params)
        prior_only = context.kprior_oracle(base_weights=base.weights, memory=memory, weight_div=None)(w)[0]
        removed = context.data_value_and_grad(w=w, data=plan.removed)[0]
        np.testing.assert_allclose(objective(w)[0], prior_only - removed, rtol=1e-12)

    def test_mixing_out_of_range_raises(self, setting):
        old, new, context, base = setting
        plan = plan_task(task=AddData(new=new), old_data=old, delta_old=1.0)
        with pytest.raises(ValueError):
            kprior_objective(
                context=context, plan=plan, base_weights=base.weights, memory=select_memorable(model=base, data=old, m=2),
                weight_div=None, anchor=None, kd_lambda=2.0,
            )


class TestReplayObjective:
    def test_leaves_removed_rows_out_of_the_memory(self, setting):
        old, _, context, base = setting
        plan = plan_task(task=RemoveData(indices=[3]), old_data=old, delta_old=1.0)
        memory = select_memorable(model=base, data=old, m=old.num_examples)
        objective = replay_objective(context=context, plan=plan, memory=memory, replay_tau=2.0)
        assert objective.blocks[0].num_examples == old.num_examples - 1
        np.testing.assert_allclose(objective.weight_term(np.ones(context.num_params))[1], 2.0 * np.ones(context.num_params))


class TestWeightPriorObjective:
    def test_only_supports_adding_data(self, setting):
        old, _, context, base = setting
        plan = plan_task(task=RemoveData(indices=[0]), old_data=old, delta_old=1.0)
        with pytest.raises(UnsupportedTaskError):
            weight_prior_objective(context=context, plan=plan, base_weights=base.weights, ggn_full=np.eye(context.num_params))

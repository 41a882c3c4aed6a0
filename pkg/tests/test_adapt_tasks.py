import numpy as np
import pytest

from helpers import make_logistic_data
from kpriorpy.adapt.tasks import (
    ADD_DATA,
    COMPOSITE,
    REMOVE_DATA,
    AddData,
    ChangeModelClass,
    ChangeRegularizer,
    CompositeTask,
    RemoveData,
    plan_task,
)
from kpriorpy.core.exceptions import DimensionMismatchError, InvalidDataError, UnsupportedTaskError
from kpriorpy.glm.features import FeatureMap


@pytest.fixture
def old_data():
    return make_logistic_data(seed=0, num_examples=10, input_dim=2)


class TestPlanTask:
    def test_add_data(self, old_data):
        new = make_logistic_data(seed=1, num_examples=4, input_dim=2)
        plan = plan_task(task=AddData(new=new), old_data=old_data, delta_old=2.0)
        assert plan.kind == ADD_DATA
        assert plan.kept_old.num_examples == 10
        assert plan.final_data.num_examples == 14
        assert plan.removed.num_examples == 0
        assert plan.delta_new == 2.0
        assert not plan.changes_model_class

    def test_remove_data(self, old_data):
        plan = plan_task(task=RemoveData(indices=[7, 2]), old_data=old_data, delta_old=1.0)
        assert plan.kind == REMOVE_DATA
        assert plan.removed_indices == (2, 7)
        np.testing.assert_array_equal(plan.removed.inputs, old_data.inputs[[2, 7]])
        assert plan.final_data.num_examples == 8

    def test_change_regularizer(self, old_data):
        plan = plan_task(task=ChangeRegularizer(delta_new=5.0), old_data=old_data, delta_old=50.0)
        assert (plan.delta_old, plan.delta_new) == (50.0, 5.0)
        assert plan.final_data.num_examples == 10

    def test_change_model_class(self, old_data):
        new_map = FeatureMap(degree=1, input_dim=2)
        plan = plan_task(task=ChangeModelClass(new_map=new_map), old_data=old_data, delta_old=1.0)
        assert plan.changes_model_class
        assert plan.new_architecture == new_map

    def test_composite(self, old_data):
        task = CompositeTask(
            add=AddData(new=make_logistic_data(seed=2, num_examples=3, input_dim=2)),
            remove=RemoveData(indices=[0]),
            regularizer=ChangeRegularizer(delta_new=0.5),
        )
        plan = plan_task(task=task, old_data=old_data, delta_old=1.0)
        assert plan.kind == COMPOSITE
        assert plan.final_data.num_examples == 12
        assert plan.removed.num_examples == 1
        assert plan.delta_new == 0.5

    def test_removing_everything_leaves_no_data(self, old_data):
        plan = plan_task(task=RemoveData(indices=range(10)), old_data=old_data, delta_old=1.0)
        assert plan.final_data.num_examples == 0


class TestInvalidTasks:
    def test_duplicate_removals_raise(self):
        with pytest.raises(InvalidDataError):
            RemoveData(indices=[1, 1])

    def test_negative_removals_raise(self):
        with pytest.raises(InvalidDataError):
            RemoveData(indices=[-1])

    def test_removal_beyond_the_data_raises(self, old_data):
        with pytest.raises(InvalidDataError):
            plan_task(task=RemoveData(indices=[10]), old_data=old_data, delta_old=1.0)

    def test_new_data_of_another_dimension_raises(self, old_data):
        with pytest.raises(DimensionMismatchError):
            plan_task(task=AddData(new=make_logistic_data(seed=1, num_examples=3, input_dim=3)), old_data=old_data, delta_old=1.0)

    def test_empty_composite_raises(self):
        with pytest.raises(UnsupportedTaskError):
            CompositeTask()

    def test_negative_regularizer_raises(self):
        with pytest.raises(ValueError):
            ChangeRegularizer(delta_new=-1.0)

import numpy as np
import pytest

from kpriorpy.core.exceptions import InvalidDataError
from kpriorpy.data_wrangler.transform import SplitSpec, split_data, split_indices, standardize
from kpriorpy.glm.models import LabeledData


@pytest.fixture
def imbalanced():
    labels = np.array([0] * 30 + [1] * 10, dtype=float)
    return LabeledData(inputs=np.arange(80.0).reshape(40, 2), labels=labels)


class TestSplitSpec:
    def test_needs_exactly_one_size(self):
        with pytest.raises(ValueError):
            SplitSpec()
        with pytest.raises(ValueError):
            SplitSpec(fraction=0.5, count=3)

    def test_fraction_range(self):
        with pytest.raises(ValueError):
            SplitSpec(fraction=0.0)

    def test_count_beyond_the_data_raises(self, imbalanced):
        with pytest.raises(InvalidDataError):
            split_data(data=imbalanced, spec=SplitSpec(count=41))


class TestSplitData:
    def test_sizes_and_disjointness(self, imbalanced):
        selected, rest = split_data(data=imbalanced, spec=SplitSpec(fraction=0.25, seed=1))
        assert (selected.num_examples, rest.num_examples) == (10, 30)
        assert not set(selected.inputs[:, 0]) & set(rest.inputs[:, 0])

    def test_stratified_split_keeps_class_shares(self, imbalanced):
        selected, _ = split_data(data=imbalanced, spec=SplitSpec(fraction=0.2, seed=2, stratify=True))
        assert int(np.sum(selected.labels == 0.0)) == 6
        assert int(np.sum(selected.labels == 1.0)) == 2

    def test_indices_are_sorted_and_seeded(self, imbalanced):
        first = split_indices(data=imbalanced, spec=SplitSpec(count=7, seed=3))
        second = split_indices(data=imbalanced, spec=SplitSpec(count=7, seed=3))
        np.testing.assert_array_equal(first, second)
        assert np.all(np.diff(first) > 0)

    def test_selected_rows_keep_their_relative_order(self, imbalanced):
        selected, rest = split_data(data=imbalanced, spec=SplitSpec(count=5, seed=4))
        assert np.all(np.diff(selected.inputs[:, 0]) > 0)
        assert np.all(np.diff(rest.inputs[:, 0]) > 0)


class TestStandardize:
    def test_uses_training_statistics(self):
        train = LabeledData(inputs=[[0.0, 5.0], [2.0, 5.0]], labels=[0, 1])
        test = LabeledData(inputs=[[4.0, 7.0]], labels=[1])
        scaled_train, (scaled_test,), mean, std = standardize(train=train, others=[test])
        np.testing.assert_array_equal(scaled_train.inputs, [[-1.0, 0.0], [1.0, 0.0]])
        np.testing.assert_array_equal(scaled_test.inputs, [[3.0, 2.0]])
        np.testing.assert_array_equal(mean, [1.0, 5.0])
        np.testing.assert_array_equal(std, [1.0, 0.0])

    def test_training_columns_are_centered(self, rng):
        inputs = np.column_stack([rng.normal(size=20), np.full(20, 3.5), rng.uniform(size=20)])
        scaled_train, _, _, _ = standardize(train=LabeledData(inputs=inputs, labels=np.zeros(20)), others=[])
        np.testing.assert_allclose(scaled_train.inputs.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_array_equal(scaled_train.inputs[:, 1], 0.0)

    def test_empty_training_set_raises(self):
        with pytest.raises(InvalidDataError):
            standardize(train=LabeledData.empty(input_dim=2), others=[])

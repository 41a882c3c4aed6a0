import os

import numpy as np
import pytest

from kpriorpy.core.exceptions import InvalidDataError
from kpriorpy.data_wrangler.file_io import load_dense_csv, load_sparse, save_sparse
from kpriorpy.glm.models import LabeledData

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def _fixture(name: str) -> str:
    return os.path.join(FIXTURES, name)


class TestLoadSparse:
    def test_reads_a_tiny_file(self):
        data = load_sparse(path=_fixture("tiny.svm"))
        np.testing.assert_array_equal(data.labels, [1.0, 0.0, 1.0, 0.0])
        np.testing.assert_array_equal(
            data.inputs,
            [[2.0, 0.0, 1.5], [0.0, -1.0, 0.0], [0.5, 0.25, 4.0], [0.0, 0.0, 0.0]],
        )

    def test_num_features_pads_columns(self):
        assert load_sparse(path=_fixture("tiny.svm"), num_features=5).input_dim == 5

    def test_num_features_below_the_largest_index_raises(self):
        with pytest.raises(InvalidDataError):
            load_sparse(path=_fixture("tiny.svm"), num_features=2)

    def test_unsorted_indices_raise(self):
        with pytest.raises(InvalidDataError, match="Line 1"):
            load_sparse(path=_fixture("unsorted.svm"))

    def test_save_then_load_keeps_every_digit(self, tmp_path):
        data = LabeledData(inputs=[[0.1, 0.0], [1.0 / 3.0, -2.0e-12]], labels=[1, 0])
        path = str(tmp_path / "saved.svm")
        save_sparse(data=data, path=path)
        loaded = load_sparse(path=path, num_features=2)
        np.testing.assert_array_equal(loaded.inputs, data.inputs)
        np.testing.assert_array_equal(loaded.labels, data.labels)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_data_survives_a_save_and_load(self, tmp_path, seed):
        rng = np.random.default_rng(seed)
        num_examples, num_features = int(rng.integers(1, 30)), int(rng.integers(1, 8))
        inputs = rng.normal(size=(num_examples, num_features)) * (rng.uniform(size=(num_examples, num_features)) < 0.6)
        data = LabeledData(inputs=inputs, labels=rng.integers(0, 2, size=num_examples))
        path = str(tmp_path / "random.svm")
        save_sparse(data=data, path=path)
        loaded = load_sparse(path=path, num_features=num_features)
        np.testing.assert_array_equal(loaded.inputs, data.inputs)
        np.testing.assert_array_equal(loaded.labels, data.labels)

    def test_empty_file_gives_no_rows(self, tmp_path):
        path = tmp_path / "empty.svm"
        path.write_text("", encoding='utf8')
        assert load_sparse(path=str(path)).num_examples == 0
        data = load_sparse(path=str(path), num_features=3)
        assert (data.num_examples, data.input_dim) == (0, 3)


class TestLoadDenseCsv:
    def test_label_column_is_taken_out(self):
        data = load_dense_csv(path=_fixture("tiny.csv"), label_column="label")
        np.testing.assert_array_equal(data.labels, [0.0, 1.0, 1.0, 0.0])
        np.testing.assert_array_equal(data.inputs, [[1.0, 2.5], [-0.5, 3.0], [2.0, 0.0], [0.0, -1.0]])

    def test_missing_label_column_raises(self):
        with pytest.raises(InvalidDataError, match="target"):
            load_dense_csv(path=_fixture("tiny.csv"), label_column="target")

    def test_non_numeric_cell_names_its_position(self):
        with pytest.raises(InvalidDataError, match="data row 2"):
            load_dense_csv(path=_fixture("bad_cell.csv"), label_column="label")

    def test_header_only_file_gives_no_rows(self, tmp_path):
        path = tmp_path / "header.csv"
        path.write_text("a,label,b\n", encoding='utf8')
        data = load_dense_csv(path=str(path), label_column="label")
        assert (data.num_examples, data.input_dim) == (0, 2)

    def test_empty_file_raises(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding='utf8')
        with pytest.raises(InvalidDataError, match="no header"):
            load_dense_csv(path=str(path), label_column="label")

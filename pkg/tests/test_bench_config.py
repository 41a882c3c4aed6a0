import pytest

from kpriorpy.bench.config import (
    FLAGS_BY_NAME,
    ExperimentConfig,
    config_from_mapping,
    parse_bool,
    parse_value,
    read_config_file,
    target_column,
)
from kpriorpy.core.exceptions import InvalidConfigError


class TestParsing:
    def test_repeatable_values_are_comma_separated(self):
        cfg = config_from_mapping(values={'task': 'remove-data', 'memory-frac': '0.1, 1.0', 'method': 'kprior,replay'})
        assert cfg.task == 'remove-data'
        assert cfg.memory_fractions == (0.1, 1.0)
        assert cfg.methods == ('kprior', 'replay')

    def test_non_string_values_are_taken_as_they_are(self):
        cfg = config_from_mapping(values={'seeds': 3, 'hidden': [20, 10]})
        assert cfg.seeds == 3
        assert cfg.hidden == (20, 10)

    def test_base_values_are_kept(self):
        base = ExperimentConfig(seeds=4)
        assert config_from_mapping(values={'tau': '2'}, base=base).seeds == 4

    def test_bad_number_raises(self):
        with pytest.raises(InvalidConfigError, match="seeds"):
            parse_value(flag=FLAGS_BY_NAME['seeds'], text="three")

    def test_unknown_key_raises(self):
        with pytest.raises(InvalidConfigError):
            config_from_mapping(values={'learning_rate': '0.1'})

    @pytest.mark.parametrize("text, expected", [("true", True), ("Yes", True), ("0", False), ("off", False)])
    def test_parse_bool(self, text, expected):
        assert parse_bool(text) is expected

    def test_target_column(self):
        assert target_column(target=0.9) == "grad_evals_to_0.9"
        assert target_column(target=1.0) == "grad_evals_to_1"


class TestConfigFile:
    def test_comments_and_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "grid.cfg"
        path.write_text("# a grid\n\ntask = add-data\nmemory-frac=0.05,0.5\n", encoding='utf8')
        assert read_config_file(path=str(path)) == {'task': 'add-data', 'memory-frac': '0.05,0.5'}

    def test_unknown_key_names_the_line(self, tmp_path):
        path = tmp_path / "grid.cfg"
        path.write_text("task=add-data\nmemory_frac=0.1\n", encoding='utf8')
        with pytest.raises(InvalidConfigError, match="line 2"):
            read_config_file(path=str(path))

    def test_line_without_equals_raises(self, tmp_path):
        path = tmp_path / "grid.cfg"
        path.write_text("task add-data\n", encoding='utf8')
        with pytest.raises(InvalidConfigError, match="line 1"):
            read_config_file(path=str(path))


class TestValidation:
    @pytest.mark.parametrize("overrides", [
        {'task': 'forget-everything'},
        {'methods': ()},
        {'methods': ('kprior', 'kprior')},
        {'methods': ('ewc',)},
        {'memory_fractions': (0.0,)},
        {'memory_fractions': (1.5,)},
        {'task': 'remove-data', 'methods': ('weight-prior',)},
        {'temperature': 2.0},
        {'kd_lambda': 1.5},
        {'tau': 0.0},
        {'delta_new': 1.0},
        {'task': 'remove-data', 'delta': 0.0},
        {'task': 'change-model-class', 'degree': 1},
        {'task': 'change-model-class', 'model': 'mlp', 'hidden': (10,), 'hidden_new': (10,)},
        {'seeds': 0},
        {'moons_n': 11},
        {'targets': (1.2,)},
        {'workers': 0},
        {'plot_y': 'accuracy'},
    ])
    def test_invalid_values_raise(self, overrides):
        with pytest.raises(InvalidConfigError):
            ExperimentConfig(**overrides)

    def test_temperature_is_allowed_for_the_mlp(self):
        assert ExperimentConfig(model='mlp', temperature=2.0).temperature == 2.0

    def test_cost_to_target_columns_can_be_plotted(self):
        assert ExperimentConfig(targets=(0.9,), plot_y='grad_evals_to_0.9').plot_y == 'grad_evals_to_0.9'


class TestDerivedValues:
    def test_deltas_of_most_tasks(self):
        assert ExperimentConfig().deltas == (5.0, 5.0)
        assert ExperimentConfig(delta=2.0).deltas == (2.0, 2.0)

    def test_default_regularizer_change(self):
        assert ExperimentConfig(task='change-regularizer').deltas == (50.0, 5.0)
        assert ExperimentConfig(task='change-regularizer', model='mlp').deltas == (5.0, 10.0)
        assert ExperimentConfig(task='change-regularizer', delta=1.0, delta_new=3.0).deltas == (1.0, 3.0)

    def test_new_architecture_defaults(self):
        assert ExperimentConfig(degree=3).new_degree == 2
        assert ExperimentConfig(degree=1, degree_new=2).new_degree == 2
        assert ExperimentConfig(hidden=(20, 10)).new_hidden == (20,)

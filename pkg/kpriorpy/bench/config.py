"""
Configuration of a benchmark grid (task x method x memory fraction x replicate).

Values come from three sources, in increasing precedence: the defaults below, a `key=value` text file
and command-line flags. Keys of the text file are the flag names without the leading dashes; repeatable
flags take comma-separated values, eg: `memory-frac=0.02,0.05,0.1`.
"""

from dataclasses import dataclass, fields, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

from kpriorpy.adapt.methods import (
    KPRIOR,
    METHODS,
    REPLAY_TAU_OPTIONS,
    REPLAY_TAU_ONE,
    WEIGHT_PRIOR,
)
from kpriorpy.adapt.tasks import (
    ADD_DATA,
    CHANGE_MODEL_CLASS,
    CHANGE_REGULARIZER,
    REMOVE_DATA,
)
from kpriorpy.core.exceptions import InvalidConfigError
from kpriorpy.core.utils import create_string_repr
from kpriorpy.memory.selection import SELECTION_STRATEGIES, TOP_H_PRIME
from kpriorpy.mlp.network import ACTIVATIONS, RELU

MODEL_GLM = "glm"
MODEL_MLP = "mlp"
MODELS = [MODEL_GLM, MODEL_MLP]

BENCH_TASKS = [ADD_DATA, REMOVE_DATA, CHANGE_REGULARIZER, CHANGE_MODEL_CLASS]

DEFAULT_MEMORY_FRACTIONS = (0.02, 0.05, 0.10, 0.25, 0.50, 1.0)
DEFAULT_DELTA = 5.0
DEFAULT_REGULARIZER_CHANGE = {
    MODEL_GLM: (50.0, 5.0),
    MODEL_MLP: (5.0, 10.0),
}

RECORD_COLUMNS = [
    'cell_index',
    'replicate',
    'seed',
    'task',
    'method',
    'model',
    'selection',
    'memory_fraction',
    'memory_size',
    'tau',
    'delta',
    'delta_new',
    'degree',
    'train_acc',
    'test_acc',
    'final_objective',
    'l2_to_batch',
    'linf_to_batch',
    'pred_disagreement',
    'grad_evals',
    'backprops',
    'wall_ms',
    'converged',
]


def target_column(target: float) -> str:
    """Name of the cost-to-target column of the results CSV, eg: 'grad_evals_to_0.9'"""
    return f"grad_evals_to_{target:g}"


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Parameters:
        - task (str): Options: ['add-data', 'remove-data', 'change-regularizer', 'change-model-class'].
        - methods (tuple): Any of ['batch', 'replay', 'kprior', 'kprior-no-anchor', 'weight-prior'].
        - memory_fractions (tuple): Memory sizes as fractions of the old data, each in (0, 1].
        - selection (str): Options: ['memorable', 'random'].
        - tau, replay_tau, kd_lambda, temperature: See `kpriorpy.adapt.methods.AdaptConfig`.
        - delta (float): Old regularizer strength (None means 5, or the model's default pair when changing it).
        - delta_new (float): New regularizer strength for the 'change-regularizer' task.
        - degree (int): Polynomial degree of the GLM. `degree_new` is the degree after a model-class change.
        - model (str): Options: ['glm', 'mlp'].
        - hidden, hidden_new (tuple): Hidden layer sizes of the MLP before/after a model-class change.
        - seeds (int): Number of replicates. `master_seed` seeds the whole grid.
        - data, test_data (str): Data files (sparse text, or CSV when ending in '.csv'); moons if `data` is None.
        - targets (tuple): Accuracies at which the cost-to-target is recorded.
        - timing (bool): If False, `wall_ms` is written as 0 so that reruns give byte-identical CSV files.
    """
    task: str = ADD_DATA
    methods: Tuple[str, ...] = (KPRIOR,)
    memory_fractions: Tuple[float, ...] = DEFAULT_MEMORY_FRACTIONS
    selection: str = TOP_H_PRIME
    tau: float = 1.0
    replay_tau: str = REPLAY_TAU_ONE
    kd_lambda: float = 0.0
    temperature: float = 1.0
    delta: Optional[float] = None
    delta_new: Optional[float] = None
    degree: int = 1
    degree_new: Optional[int] = None
    model: str = MODEL_GLM
    hidden: Tuple[int, ...] = (100,)
    hidden_new: Optional[Tuple[int, ...]] = None
    activation: str = RELU
    seeds: int = 1
    master_seed: int = 0
    data: Optional[str] = None
    test_data: Optional[str] = None
    label_column: str = "label"
    test_fraction: float = 0.2
    new_fraction: float = 0.1
    moons_n: int = 500
    moons_noise: float = 0.1
    targets: Tuple[float, ...] = ()
    random_init: bool = False
    tol: float = 1e-8
    max_iters: int = 5000
    minibatch: Optional[int] = None
    learning_rate: float = 1e-3
    epochs: int = 100
    workers: int = 1
    timing: bool = True
    out_csv: Optional[str] = None
    plot_dir: Optional[str] = None
    plot_x: str = "memory_fraction"
    plot_y: str = "test_acc"
    plot_group: Tuple[str, ...] = ("task", "method")
    log_file: Optional[str] = None
    verbose: bool = False

    def __post_init__(self) -> None:
        validate_config(cfg=self)

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={
                'task': self.task,
                'methods': self.methods,
                'memory_fractions': self.memory_fractions,
                'model': self.model,
                'seeds': self.seeds,
            },
        )

    @property
    def deltas(self) -> Tuple[float, float]:
        """The pair (delta_old, delta_new) used by the grid"""
        if self.task == CHANGE_REGULARIZER and self.delta_new is None:
            default_old, default_new = DEFAULT_REGULARIZER_CHANGE[self.model]
            return (default_old if self.delta is None else self.delta), default_new
        delta_old = DEFAULT_DELTA if self.delta is None else self.delta
        if self.task == CHANGE_REGULARIZER:
            return delta_old, self.delta_new
        return delta_old, delta_old

    @property
    def new_degree(self) -> int:
        return self.degree - 1 if self.degree_new is None else self.degree_new

    @property
    def new_hidden(self) -> Tuple[int, ...]:
        return self.hidden[:-1] if self.hidden_new is None else self.hidden_new


def __fail(message: str) -> None:
    raise InvalidConfigError(message)


def __check_choice(name: str, value: Any, choices: List[Any]) -> None:
    if value not in choices:
        __fail(f"Expected `{name}` to be in {choices}, but got {value!r}")
    return None


def validate_config(cfg: ExperimentConfig) -> None:
    """Raises InvalidConfigError for any invalid value or flag combination; otherwise returns None"""
    __check_choice(name='task', value=cfg.task, choices=BENCH_TASKS)
    __check_choice(name='selection', value=cfg.selection, choices=SELECTION_STRATEGIES)
    __check_choice(name='replay_tau', value=cfg.replay_tau, choices=REPLAY_TAU_OPTIONS)
    __check_choice(name='model', value=cfg.model, choices=MODELS)
    __check_choice(name='activation', value=cfg.activation, choices=ACTIVATIONS)
    if not cfg.methods:
        __fail("At least one method is required")
    for method in cfg.methods:
        __check_choice(name='method', value=method, choices=METHODS)
    if len(set(cfg.methods)) != len(cfg.methods):
        __fail(f"Methods must not repeat, but got {cfg.methods}")
    if not cfg.memory_fractions or any(not 0.0 < fraction <= 1.0 for fraction in cfg.memory_fractions):
        __fail(f"Expected every memory fraction in (0, 1], but got {cfg.memory_fractions}")
    if WEIGHT_PRIOR in cfg.methods and cfg.task != ADD_DATA:
        __fail(f"Method '{WEIGHT_PRIOR}' requires the '{ADD_DATA}' task, but got '{cfg.task}'")
    if cfg.temperature != 1.0 and cfg.model != MODEL_MLP:
        __fail("A temperature other than 1 is only supported for the MLP model")
    if not cfg.temperature > 0:
        __fail(f"Expected `temperature` > 0, but got {cfg.temperature}")
    if not cfg.tau > 0:
        __fail(f"Expected `tau` > 0, but got {cfg.tau}")
    if not 0.0 <= cfg.kd_lambda <= 1.0:
        __fail(f"Expected `kd_lambda` in [0, 1], but got {cfg.kd_lambda}")
    for name in ['delta', 'delta_new']:
        value = getattr(cfg, name)
        if value is not None and not value >= 0:
            __fail(f"Expected `{name}` >= 0, but got {value}")
    if cfg.delta_new is not None and cfg.task != CHANGE_REGULARIZER:
        __fail(f"`delta_new` is only used by the '{CHANGE_REGULARIZER}' task")
    if cfg.task == REMOVE_DATA and not cfg.deltas[0] > 0:
        __fail(f"The '{REMOVE_DATA}' task requires `delta` > 0")
    if cfg.degree < 1 or (cfg.degree_new is not None and cfg.degree_new < 1):
        __fail(f"Expected degrees >= 1, but got degree={cfg.degree}, degree_new={cfg.degree_new}")
    if any(size < 1 for size in cfg.hidden) or not cfg.hidden:
        __fail(f"Expected at least one hidden layer of positive size, but got {cfg.hidden}")
    if cfg.task == CHANGE_MODEL_CLASS:
        if cfg.model == MODEL_GLM and (cfg.new_degree < 1 or cfg.new_degree == cfg.degree):
            __fail(f"A model-class change needs a new degree >= 1 different from {cfg.degree}; set `degree_new`")
        if cfg.model == MODEL_MLP and (not cfg.new_hidden or cfg.new_hidden == cfg.hidden or min(cfg.new_hidden) < 1):
            __fail(f"A model-class change needs new hidden sizes different from {cfg.hidden}; set `hidden_new`")
    if cfg.seeds < 1 or cfg.master_seed < 0:
        __fail(f"Expected seeds >= 1 and master_seed >= 0, but got {cfg.seeds} and {cfg.master_seed}")
    if not 0.0 < cfg.test_fraction < 1.0 or not 0.0 < cfg.new_fraction < 1.0:
        __fail("Expected `test_fraction` and `new_fraction` in (0, 1)")
    if cfg.moons_n < 10 or cfg.moons_n % 2 != 0 or cfg.moons_noise < 0:
        __fail(f"Expected an even `moons_n` >= 10 and `moons_noise` >= 0, but got {cfg.moons_n} and {cfg.moons_noise}")
    if any(not 0.0 < target <= 1.0 for target in cfg.targets):
        __fail(f"Expected every target accuracy in (0, 1], but got {cfg.targets}")
    if not cfg.tol > 0 or cfg.max_iters < 0:
        __fail(f"Expected `tol` > 0 and `max_iters` >= 0, but got {cfg.tol} and {cfg.max_iters}")
    if cfg.minibatch is not None and (cfg.minibatch < 1 or not cfg.learning_rate > 0 or cfg.epochs < 0):
        __fail("Expected `minibatch` >= 1, `learning_rate` > 0 and `epochs` >= 0")
    if cfg.workers < 1:
        __fail(f"Expected `workers` >= 1, but got {cfg.workers}")
    result_fields = RECORD_COLUMNS + [target_column(target=target) for target in cfg.targets]
    for field_name in [cfg.plot_x, cfg.plot_y, *cfg.plot_group]:
        __check_choice(name='plot field', value=field_name, choices=result_fields)
    return None


def parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ['1', 'true', 'yes', 'on']:
        return True
    if lowered in ['0', 'false', 'no', 'off']:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def __comma_list(parse: Callable[[str], Any]) -> Callable[[str], Tuple[Any, ...]]:
    def parse_list(text: str) -> Tuple[Any, ...]:
        return tuple(parse(item.strip()) for item in text.split(",") if item.strip())
    return parse_list


@dataclass(frozen=True)
class Flag:
    """One configuration key: its flag name (without dashes), the config field it sets and its parser"""
    name: str
    field_name: str
    parse: Callable[[str], Any]
    help: str
    repeatable: bool = False
    switch: bool = False


FLAGS = [
    Flag("task", "task", str, f"Adaptation task. Options: {BENCH_TASKS}"),
    Flag("method", "methods", str, f"Method (repeatable). Options: {METHODS}", repeatable=True),
    Flag("memory-frac", "memory_fractions", float, "Memory fraction in (0, 1] (repeatable)", repeatable=True),
    Flag("selection", "selection", str, f"Memory selection. Options: {SELECTION_STRATEGIES}"),
    Flag("tau", "tau", float, "Multiplier of the K-prior's weight term"),
    Flag("replay-tau", "replay_tau", str, f"Multiplier of Replay's regularizer. Options: {REPLAY_TAU_OPTIONS}"),
    Flag("kd-lambda", "kd_lambda", float, "Weight of the true-label loss on the memory"),
    Flag("temperature", "temperature", float, "Temperature of the functional term (MLP only)"),
    Flag("delta", "delta", float, "Old regularizer strength"),
    Flag("delta-new", "delta_new", float, "New regularizer strength (change-regularizer)"),
    Flag("degree", "degree", int, "Polynomial degree of the GLM"),
    Flag("degree-new", "degree_new", int, "Polynomial degree after a model-class change"),
    Flag("model", "model", str, f"Model class. Options: {MODELS}"),
    Flag("hidden", "hidden", int, "Hidden layer size of the MLP (repeatable)", repeatable=True),
    Flag("hidden-new", "hidden_new", int, "Hidden layer size after a model-class change (repeatable)", repeatable=True),
    Flag("activation", "activation", str, f"MLP activation. Options: {ACTIVATIONS}"),
    Flag("seeds", "seeds", int, "Number of replicates"),
    Flag("master-seed", "master_seed", int, "Seed of the whole grid"),
    Flag("data", "data", str, "Training data file (sparse text, or CSV ending in '.csv'); moons if absent"),
    Flag("test-data", "test_data", str, "Test data file; split off the training data if absent"),
    Flag("label-column", "label_column", str, "Label column of CSV files"),
    Flag("test-fraction", "test_fraction", float, "Fraction of the data held out for testing"),
    Flag("new-fraction", "new_fraction", float, "Fraction of the old data added/removed (data files)"),
    Flag("moons-n", "moons_n", int, "Number of moons points"),
    Flag("moons-noise", "moons_noise", float, "Noise of the moons points"),
    Flag("targets", "targets", float, "Target accuracy for the cost-to-target (repeatable)", repeatable=True),
    Flag("random-init", "random_init", parse_bool, "Start every method from a random point", switch=True),
    Flag("tol", "tol", float, "Gradient tolerance of the optimizer"),
    Flag("max-iters", "max_iters", int, "Iteration limit of the optimizer"),
    Flag("minibatch", "minibatch", int, "Train with minibatches of this size instead of L-BFGS"),
    Flag("learning-rate", "learning_rate", float, "Step size of minibatch training"),
    Flag("epochs", "epochs", int, "Epochs of minibatch training"),
    Flag("workers", "workers", int, "Number of parallel workers"),
    Flag("timing", "timing", parse_bool, "Record wall-clock times (false gives byte-identical reruns)"),
    Flag("out-csv", "out_csv", str, "Path of the results CSV"),
    Flag("plot-dir", "plot_dir", str, "Directory for plot-data files"),
    Flag("plot-x", "plot_x", str, "Column on the x-axis of the plot data"),
    Flag("plot-y", "plot_y", str, "Column averaged over replicates in the plot data"),
    Flag("plot-group", "plot_group", str, "Column defining one plot-data file per value (repeatable)", repeatable=True),
    Flag("log-file", "log_file", str, "Write logs to this file"),
    Flag("verbose", "verbose", parse_bool, "Log at DEBUG level", switch=True),
]
FLAGS_BY_NAME = {flag.name: flag for flag in FLAGS}


def read_config_file(path: str) -> Dict[str, str]:
    """
    Reads a `key=value` file into a dictionary of raw strings. Blank lines and lines starting with '#'
    are skipped; unknown keys and lines without '=' raise InvalidConfigError naming the line.
    """
    raw = {}
    with open(path, mode='r', encoding='utf8') as file:
        for line_number, line in enumerate(file, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, separator, value = stripped.partition("=")
            key = key.strip()
            if separator != "=":
                raise InvalidConfigError(f"{path}, line {line_number}: expected 'key=value', but got {stripped!r}")
            if key not in FLAGS_BY_NAME:
                raise InvalidConfigError(f"{path}, line {line_number}: unknown key {key!r}")
            raw[key] = value.strip()
    return raw


def parse_value(flag: Flag, text: str) -> Any:
    """Parses the raw string of one key (comma-separated for repeatable keys)"""
    parse = __comma_list(parse=flag.parse) if flag.repeatable else flag.parse
    try:
        return parse(text)
    except ValueError as error:
        raise InvalidConfigError(f"Could not parse {flag.name}={text!r}: {error}")


def config_from_mapping(
        values: Dict[str, Any],
        base: Optional[ExperimentConfig] = None,
    ) -> ExperimentConfig:
    """
    Builds an ExperimentConfig from flag names mapped to values. String values are parsed; other values
    are taken as they are. Keys absent from `values` keep the value of `base` (the defaults if None).

    >>> config_from_mapping({'task': 'remove-data', 'memory-frac': '0.1,1.0', 'method': 'kprior,replay'})
    """
    overrides = {}
    for name, value in values.items():
        if name not in FLAGS_BY_NAME:
            raise InvalidConfigError(f"Unknown configuration key {name!r}")
        flag = FLAGS_BY_NAME[name]
        if isinstance(value, str):
            value = parse_value(flag=flag, text=value)
        elif flag.repeatable and value is not None:
            value = tuple(value)
        overrides[flag.field_name] = value
    base = ExperimentConfig() if base is None else base
    known_fields = {config_field.name for config_field in fields(ExperimentConfig)}
    unknown = set(overrides) - known_fields
    if unknown:
        raise InvalidConfigError(f"Unknown configuration fields {sorted(unknown)}")
    return replace(base, **overrides)

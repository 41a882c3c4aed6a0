"""
Runs a benchmark grid and collects one ResultRecord per cell.

Seeding: replicate r uses the seed derive_seed(master_seed, "replicate", r), which fixes its data, its
base model, its memory sets and its batch reference. Cell i uses derive_seed(master_seed, i) for random
initialisation and minibatch shuffling. Everything else is deterministic, so the records (and the CSV,
when timing is off) do not depend on the number of workers.

Moons protocol: the points are sorted by their first coordinate and cut into 5 splits. Adding data
trains the base model on splits 1-3 and adds split 4; removing data trains on splits 1-4 and removes
split 4; the other tasks use all splits. Test data is an independent moons draw of the same size.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from joblib import Parallel, delayed
from tqdm import tqdm
import numpy as np
import pandas as pd

from kpriorpy.adapt.diagnostics import distance_to_batch
from kpriorpy.adapt.methods import (
    BATCH,
    KPRIOR,
    REPLAY,
    WEIGHT_PRIOR,
    AdaptConfig,
    adapt_kprior,
    adapt_replay,
    adapt_weight_prior,
    context_for_plan,
    solve_batch,
    train_base_model,
)
from kpriorpy.adapt.model_context import ModelContext, make_context
from kpriorpy.adapt.objectives import batch_objective
from kpriorpy.adapt.tasks import (
    ADD_DATA,
    CHANGE_MODEL_CLASS,
    CHANGE_REGULARIZER,
    REMOVE_DATA,
    AdaptationTask,
    AdaptOutcome,
    AddData,
    ChangeModelClass,
    ChangeRegularizer,
    RemoveData,
    TaskPlan,
    plan_task,
)
from kpriorpy.bench.config import MODEL_GLM, RECORD_COLUMNS, ExperimentConfig, target_column
from kpriorpy.core.decorators import timer
from kpriorpy.core.exceptions import InvalidDataError
from kpriorpy.core.logging_ops import get_logger_object
from kpriorpy.core.random_ops import derive_seed
from kpriorpy.data_wrangler.file_io import load_dense_csv, load_sparse
from kpriorpy.data_wrangler.synthetic import concat_splits, make_moons, ordered_splits
from kpriorpy.data_wrangler.transform import SplitSpec, split_data, split_indices, standardize
from kpriorpy.glm.features import FeatureMap
from kpriorpy.glm.models import LabeledData
from kpriorpy.memory.selection import select_memory
from kpriorpy.mlp.network import SIGMOID_OUTPUT, SOFTMAX_OUTPUT, MlpSpec
from kpriorpy.optim.minibatch import MinibatchConfig
from kpriorpy.optim.quasi_newton import OptimizerConfig

LOGGER = get_logger_object(logger_name=__name__)

NUM_MOONS_SPLITS = 5


@dataclass(frozen=True)
class ExperimentCell:
    index: int
    method: str
    memory_fraction: float
    replicate: int


@dataclass(frozen=True)
class ReplicateSetup:
    """Everything the cells of one replicate share: data, task, base model and batch reference"""
    replicate: int
    seed: int
    old_data: LabeledData
    test_data: LabeledData
    task: AdaptationTask
    plan: TaskPlan
    context: ModelContext
    base: object
    delta_old: float
    reference: AdaptOutcome
    ggn_full: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ResultRecord:
    cell_index: int
    replicate: int
    seed: int
    task: str
    method: str
    model: str
    selection: str
    memory_fraction: float
    memory_size: int
    tau: float
    delta: float
    delta_new: float
    degree: int
    train_acc: float
    test_acc: float
    final_objective: float
    l2_to_batch: float
    linf_to_batch: float
    pred_disagreement: float
    grad_evals: int
    backprops: int
    wall_ms: float
    converged: bool
    grad_evals_to_target: Tuple[Tuple[float, Optional[int]], ...] = ()

    def as_row(self) -> Dict[str, object]:
        """Flat dictionary in CSV column order (targets that were never reached map to None)"""
        row = {column: getattr(self, column) for column in RECORD_COLUMNS}
        for target, cost in self.grad_evals_to_target:
            row[target_column(target=target)] = cost
        return row


def grid_cells(cfg: ExperimentConfig) -> List[ExperimentCell]:
    """Cells in index order: replicates, then methods, then memory fractions"""
    cells = []
    for replicate in range(cfg.seeds):
        for method in cfg.methods:
            for memory_fraction in cfg.memory_fractions:
                cells.append(ExperimentCell(index=len(cells), method=method, memory_fraction=memory_fraction, replicate=replicate))
    return cells


def memory_size(memory_fraction: float, num_examples: int) -> int:
    """round(fraction * N), but at least 1 and at most N"""
    if num_examples == 0:
        return 0
    return int(min(num_examples, max(1, int(round(memory_fraction * num_examples)))))


def __read_data_file(cfg: ExperimentConfig, path: str) -> LabeledData:
    if path.lower().endswith(".csv"):
        return load_dense_csv(path=path, label_column=cfg.label_column)
    return load_sparse(path=path)


def load_replicate_data(cfg: ExperimentConfig, seed: int) -> Tuple[LabeledData, LabeledData]:
    """Returns (train, test) for one replicate"""
    if cfg.data is None:
        train = make_moons(n=cfg.moons_n, noise=cfg.moons_noise, seed=derive_seed(seed, "train"))
        test = make_moons(n=cfg.moons_n, noise=cfg.moons_noise, seed=derive_seed(seed, "test"))
        return train, test
    train = __read_data_file(cfg=cfg, path=cfg.data)
    if cfg.test_data is not None:
        test = __read_data_file(cfg=cfg, path=cfg.test_data)
        if test.input_dim != train.input_dim:
            # sparse files only know their largest index
            test = load_sparse(path=cfg.test_data, num_features=train.input_dim)
    else:
        test, train = split_data(data=train, spec=SplitSpec(fraction=cfg.test_fraction, seed=derive_seed(seed, "test"), stratify=True))
    train, (test,), _, _ = standardize(train=train, others=[test])
    return train, test


def build_architecture(cfg: ExperimentConfig, input_dim: int, labels: np.ndarray, new: bool = False):
    """FeatureMap for the GLM, MlpSpec for the MLP (sigmoid output for {0, 1} labels, softmax otherwise)"""
    if cfg.model == MODEL_GLM:
        return FeatureMap(degree=cfg.new_degree if new else cfg.degree, input_dim=input_dim)
    num_classes = int(np.max(labels)) + 1 if len(labels) > 0 else 2
    output_dim, output = (1, SIGMOID_OUTPUT) if num_classes <= 2 else (num_classes, SOFTMAX_OUTPUT)
    hidden = cfg.new_hidden if new else cfg.hidden
    return MlpSpec(layer_sizes=[input_dim, *hidden, output_dim], activation=cfg.activation, output=output)


def build_task(
        cfg: ExperimentConfig,
        train: LabeledData,
        seed: int,
    ) -> Tuple[LabeledData, AdaptationTask]:
    """Returns (old_data, task) following the moons protocol, or random splits for data files"""
    if cfg.data is None:
        splits = ordered_splits(data=train, num_splits=NUM_MOONS_SPLITS)
        if cfg.task == ADD_DATA:
            return concat_splits(splits=splits[:3]), AddData(new=splits[3])
        if cfg.task == REMOVE_DATA:
            old = concat_splits(splits=splits[:4])
            start = old.num_examples - splits[3].num_examples
            return old, RemoveData(indices=tuple(range(start, old.num_examples)))
    else:
        spec = SplitSpec(fraction=cfg.new_fraction, seed=derive_seed(seed, "new"), stratify=True)
        if cfg.task == ADD_DATA:
            new, old = split_data(data=train, spec=spec)
            return old, AddData(new=new)
        if cfg.task == REMOVE_DATA:
            return train, RemoveData(indices=tuple(split_indices(data=train, spec=spec)))
    if cfg.task == CHANGE_REGULARIZER:
        return train, ChangeRegularizer(delta_new=cfg.deltas[1])
    if cfg.task == CHANGE_MODEL_CLASS:
        new_map = build_architecture(cfg=cfg, input_dim=train.input_dim, labels=train.labels, new=True)
        return train, ChangeModelClass(new_map=new_map)
    raise InvalidDataError(f"No data protocol for the task '{cfg.task}'")


def adapt_config(
        cfg: ExperimentConfig,
        eval_data: LabeledData,
        init_seed: int,
    ) -> AdaptConfig:
    minibatch = None
    if cfg.minibatch is not None:
        minibatch = MinibatchConfig(
            batch_size=cfg.minibatch,
            learning_rate=cfg.learning_rate,
            epochs=cfg.epochs,
            seed=init_seed,
            grad_tol=cfg.tol,
        )
    return AdaptConfig(
        optimizer=OptimizerConfig(grad_tol=cfg.tol, max_iters=cfg.max_iters),
        minibatch=minibatch,
        random_init=cfg.random_init,
        init_seed=init_seed,
        tau=cfg.tau,
        replay_tau=cfg.replay_tau,
        kd_lambda=cfg.kd_lambda,
        temperature=cfg.temperature,
        eval_data=eval_data,
        targets=cfg.targets,
    )


def prepare_replicate(cfg: ExperimentConfig, replicate: int) -> ReplicateSetup:
    """Builds the data and task of one replicate, trains its base model and its batch reference"""
    seed = derive_seed(cfg.master_seed, "replicate", replicate)
    train, test = load_replicate_data(cfg=cfg, seed=seed)
    old_data, task = build_task(cfg=cfg, train=train, seed=seed)
    architecture = build_architecture(cfg=cfg, input_dim=train.input_dim, labels=train.labels)
    context = make_context(architecture=architecture, init_seed=derive_seed(seed, "init"))
    delta_old = cfg.deltas[0]
    base, base_outcome = train_base_model(
        context=context,
        data=old_data,
        delta=delta_old,
        cfg=adapt_config(cfg=cfg, eval_data=test, init_seed=derive_seed(seed, "base")),
    )
    LOGGER.info(f"Replicate {replicate}: base model trained on {old_data.num_examples} rows ({base_outcome})")
    reference = solve_batch(
        task=task,
        old_data=old_data,
        context=context,
        delta_old=delta_old,
        cfg=adapt_config(cfg=cfg, eval_data=test, init_seed=derive_seed(seed, "batch")),
    )
    ggn_full = None
    if WEIGHT_PRIOR in cfg.methods:
        ggn_full = context.ggn(w=base.weights, inputs=old_data.inputs)
    return ReplicateSetup(
        replicate=replicate,
        seed=seed,
        old_data=old_data,
        test_data=test,
        task=task,
        plan=plan_task(task=task, old_data=old_data, delta_old=delta_old),
        context=context,
        base=base,
        delta_old=delta_old,
        reference=reference,
        ggn_full=ggn_full,
    )


def __adapt(
        cfg: ExperimentConfig,
        setup: ReplicateSetup,
        cell: ExperimentCell,
        size: int,
        adapt_cfg: AdaptConfig,
    ) -> AdaptOutcome:
    if cell.method == BATCH:
        return setup.reference
    if cell.method == WEIGHT_PRIOR:
        return adapt_weight_prior(task=setup.task, base=setup.base, ggn_full=setup.ggn_full, delta=setup.delta_old, cfg=adapt_cfg)
    memory = select_memory(
        strategy=cfg.selection,
        model=setup.base,
        data=setup.old_data,
        m=size,
        seed=derive_seed(setup.seed, "memory", size),
    )
    if cell.method == REPLAY:
        return adapt_replay(task=setup.task, base=setup.base, old_data=setup.old_data, memory=memory, delta_old=setup.delta_old, cfg=adapt_cfg)
    return adapt_kprior(
        task=setup.task,
        base=setup.base,
        old_data=setup.old_data,
        memory=memory,
        delta_old=setup.delta_old,
        cfg=adapt_cfg,
        anchored=cell.method == KPRIOR,
    )


def run_cell(cfg: ExperimentConfig, setup: ReplicateSetup, cell: ExperimentCell) -> ResultRecord:
    """Adapts the base model of `setup` with the cell's method and memory size and evaluates the result"""
    cell_seed = derive_seed(cfg.master_seed, cell.index)
    size = memory_size(memory_fraction=cell.memory_fraction, num_examples=setup.old_data.num_examples)
    adapt_cfg = adapt_config(cfg=cfg, eval_data=setup.test_data, init_seed=cell_seed)
    outcome = __adapt(cfg=cfg, setup=setup, cell=cell, size=size, adapt_cfg=adapt_cfg)
    context = context_for_plan(context=setup.context, plan=setup.plan, init_seed=adapt_cfg.init_seed)
    linf, l2, disagreement = distance_to_batch(
        w_a=outcome.weights,
        w_b=setup.reference.weights,
        eval_data=setup.test_data,
        model_ctx=context,
    )
    if cell.method == BATCH:
        size = setup.plan.final_data.num_examples
    elif cell.method == WEIGHT_PRIOR:
        size = 0
    record = ResultRecord(
        cell_index=cell.index,
        replicate=cell.replicate,
        seed=cell_seed,
        task=cfg.task,
        method=cell.method,
        model=cfg.model,
        selection=cfg.selection,
        memory_fraction=cell.memory_fraction,
        memory_size=size,
        tau=cfg.tau,
        delta=setup.plan.delta_old,
        delta_new=setup.plan.delta_new,
        degree=cfg.degree,
        train_acc=context.accuracy(w=outcome.weights, data=setup.plan.final_data),
        test_acc=context.accuracy(w=outcome.weights, data=setup.test_data),
        final_objective=batch_objective(context=context, plan=setup.plan)(outcome.weights)[0],
        l2_to_batch=l2,
        linf_to_batch=linf,
        pred_disagreement=disagreement,
        grad_evals=outcome.grad_evals,
        backprops=outcome.backprops,
        wall_ms=outcome.wall_time_ms if cfg.timing else 0.0,
        converged=outcome.converged,
        grad_evals_to_target=outcome.targets_reached,
    )
    LOGGER.debug(f"Cell {cell.index} ({cell.method}, {cell.memory_fraction}): test_acc={record.test_acc:.4f}, l2_to_batch={record.l2_to_batch:.3g}")
    return record


def records_to_frame(records: List[ResultRecord], targets: Tuple[float, ...] = ()) -> pd.DataFrame:
    """DataFrame with the fixed column order: RECORD_COLUMNS, then one cost-to-target column per target"""
    columns = RECORD_COLUMNS + [target_column(target=target) for target in sorted(targets)]
    df = pd.DataFrame(data=[record.as_row() for record in records], columns=columns)
    for column in columns[len(RECORD_COLUMNS):]:
        df[column] = pd.to_numeric(df[column], errors='coerce').astype('Int64')
    return df


def write_records_csv(
        records: List[ResultRecord],
        path: str,
        targets: Tuple[float, ...] = (),
    ) -> None:
    """UTF-8, comma-separated, '.' decimals, '\\n' line ends; unreached targets are left empty"""
    df = records_to_frame(records=records, targets=targets)
    df.to_csv(path, index=False, float_format='%.10g', lineterminator='\n', encoding='utf8')
    return None


@timer
def run_grid(cfg: ExperimentConfig) -> List[ResultRecord]:
    """
    Runs every cell of the grid described by `cfg` and returns the records sorted by cell index.
    The batch reference is computed once per replicate and shared by its cells. Writes `cfg.out_csv`
    if given.

    >>> records = run_grid(cfg=ExperimentConfig(methods=('replay', 'kprior'), memory_fractions=(0.05,), seeds=5))
    """
    cells = grid_cells(cfg=cfg)
    LOGGER.info(f"Running {len(cells)} cells over {cfg.seeds} replicate(s) with {cfg.workers} worker(s)")
    with Parallel(n_jobs=cfg.workers) as parallel:
        setups = parallel(
            delayed(prepare_replicate)(cfg=cfg, replicate=replicate) for replicate in range(cfg.seeds)
        )
        records = parallel(
            delayed(run_cell)(cfg=cfg, setup=setups[cell.replicate], cell=cell)
            for cell in tqdm(cells, desc="Grid cells", disable=None)
        )
    records = sorted(records, key=lambda record: record.cell_index)
    if cfg.out_csv is not None:
        write_records_csv(records=records, path=cfg.out_csv, targets=cfg.targets)
        LOGGER.info(f"Wrote {len(records)} records to {cfg.out_csv}")
    return records

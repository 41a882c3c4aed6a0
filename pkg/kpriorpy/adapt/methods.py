"""
The adaptation methods: Batch (retrain from scratch), Replay, K-prior and the quadratic Weight-prior.

All methods minimise an `Objective` with the L-BFGS minimiser (or with the minibatch trainer when
configured) and report an `AdaptOutcome`. Gradient evaluations are counted per oracle call; backprops
are counted in example-gradient units.
"""

from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union
import time

import numpy as np

from kpriorpy.adapt.model_context import (
    GlmContext,
    ModelContext,
    MlpContext,
    make_context,
)
from kpriorpy.adapt.objectives import (
    Objective,
    batch_objective,
    data_block,
    kprior_objective,
    l2_term,
    replay_objective,
    weight_prior_objective,
)
from kpriorpy.adapt.tasks import (
    ADD_DATA,
    AdaptationTask,
    AddData,
    AdaptOutcome,
    TaskPlan,
    plan_task,
)
from kpriorpy.core.exceptions import (
    UnsupportedTaskError,
    raise_exception_if_invalid_option,
)
from kpriorpy.core.logging_ops import get_logger_object
from kpriorpy.glm.features import is_nested, prefix_projection
from kpriorpy.glm.models import GlmModel, LabeledData
from kpriorpy.kprior.divergences import L2Shift, TwoGenerator, WeightDivergenceSpec
from kpriorpy.memory.selection import MemorySet
from kpriorpy.mlp.network import MlpModel
from kpriorpy.optim.minibatch import MinibatchConfig, minimize_minibatch
from kpriorpy.optim.quasi_newton import OptimizerConfig, OptimResult, minimize
from kpriorpy.optim.tracking import TargetTracker

LOGGER = get_logger_object(logger_name=__name__)

BATCH = "batch"
REPLAY = "replay"
KPRIOR = "kprior"
KPRIOR_NO_ANCHOR = "kprior-no-anchor"
WEIGHT_PRIOR = "weight-prior"
METHODS = [BATCH, REPLAY, KPRIOR, KPRIOR_NO_ANCHOR, WEIGHT_PRIOR]

REPLAY_TAU_ONE = "one"
REPLAY_TAU_RATIO = "ratio"
REPLAY_TAU_OPTIONS = [REPLAY_TAU_ONE, REPLAY_TAU_RATIO]

REMOVE_DATA_FLOOR = -1e6

Model = Union[GlmModel, MlpModel]


@dataclass(frozen=True)
class AdaptConfig:
    """
    Options shared by the adaptation methods.

    Parameters:
        - optimizer (OptimizerConfig): Tolerances of the L-BFGS minimiser.
        - minibatch (MinibatchConfig): If given, train with seeded minibatches instead of L-BFGS.
        - random_init (bool): Start from a random point (seeded by `init_seed`) instead of the warm start.
        - tau (float): Multiplier of the K-prior's weight-space term.
        - replay_tau (str): Multiplier of Replay's regularizer. Options: ['one', 'ratio'] ('ratio' is N/M).
        - kd_lambda (float): Weight of the true-label loss on the memory, mixed with the K-prior.
        - temperature (float): Temperature of the functional term (MLPs only).
        - eval_data (LabeledData): Data on which accuracy targets are tracked (optional).
        - targets (tuple): Target accuracies for the cost-to-target measurement.
    """
    optimizer: OptimizerConfig = OptimizerConfig()
    minibatch: Optional[MinibatchConfig] = None
    random_init: bool = False
    init_seed: int = 0
    tau: float = 1.0
    replay_tau: str = REPLAY_TAU_ONE
    kd_lambda: float = 0.0
    temperature: float = 1.0
    eval_data: Optional[LabeledData] = None
    targets: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        raise_exception_if_invalid_option(option_name='replay_tau', option_value=self.replay_tau, valid_option_values=REPLAY_TAU_OPTIONS)
        if not self.tau > 0:
            raise ValueError(f"Expected `tau` > 0, but got {self.tau}")
        object.__setattr__(self, 'targets', tuple(sorted(float(target) for target in self.targets)))


def context_of(model: Model) -> ModelContext:
    if isinstance(model, GlmModel):
        return GlmContext(feature_map=model.feature_map, family=model.family)
    return MlpContext(spec=model.spec)


def context_for_plan(context: ModelContext, plan: TaskPlan, init_seed: int = 0) -> ModelContext:
    """The context of the adapted model: the old one unless the task changes the model class"""
    if not plan.changes_model_class:
        return context
    family = context.family if isinstance(context, GlmContext) else None
    return make_context(architecture=plan.new_architecture, family=family, init_seed=init_seed)


def _with_floor(plan: TaskPlan, cfg: OptimizerConfig) -> OptimizerConfig:
    if plan.removed.num_examples > 0 and cfg.objective_floor is None:
        return replace(cfg, objective_floor=REMOVE_DATA_FLOOR)
    return cfg


def _run(
        objective: Objective,
        context: ModelContext,
        w0: np.ndarray,
        cfg: AdaptConfig,
        method: str,
        memory_fraction: float,
        optimizer_cfg: OptimizerConfig,
    ) -> AdaptOutcome:
    tracker = None
    if cfg.targets and cfg.eval_data is not None:
        tracker = TargetTracker(probe=lambda w: context.accuracy(w=w, data=cfg.eval_data), targets=cfg.targets)
        tracker.observe(w=np.asarray(w0, dtype=float), cost=0)
    start = time.perf_counter()
    if cfg.minibatch is None:
        result = minimize(
            objective_and_gradient=objective,
            w0=w0,
            cfg=optimizer_cfg,
            callback=tracker,
            cost_per_eval=max(objective.num_examples, 1),
        )
    else:
        result = minimize_minibatch(
            batch_oracle=objective.minibatch,
            full_oracle=objective,
            num_examples=objective.num_examples,
            w0=w0,
            cfg=cfg.minibatch,
            callback=tracker,
        )
    wall_time_ms = 1000.0 * (time.perf_counter() - start)
    return _outcome(result=result, method=method, memory_fraction=memory_fraction, wall_time_ms=wall_time_ms, tracker=tracker)


def _outcome(
        result: OptimResult,
        method: str,
        memory_fraction: float,
        wall_time_ms: float,
        tracker: Optional[TargetTracker],
    ) -> AdaptOutcome:
    return AdaptOutcome(
        weights=result.weights,
        grad_evals=result.grad_evals,
        wall_time_ms=wall_time_ms,
        converged=result.converged,
        method=method,
        memory_fraction=memory_fraction,
        backprops=result.backprops,
        final_objective=result.value,
        iters=result.iters,
        message=result.message,
        targets_reached=tuple(tracker.results()) if tracker is not None else (),
    )


def _start_point(context: ModelContext, cfg: AdaptConfig, warm_start: Optional[np.ndarray]) -> np.ndarray:
    if cfg.random_init:
        return context.initial_weights(seed=cfg.init_seed)
    if warm_start is None:
        return context.initial_weights()
    return np.asarray(warm_start, dtype=float)


def solve_batch(
        task: AdaptationTask,
        old_data: LabeledData,
        context: ModelContext,
        delta_old: float,
        cfg: Optional[AdaptConfig] = None,
    ) -> AdaptOutcome:
    """Retrains from scratch on the adapted problem (all kept old rows and new rows)"""
    cfg = AdaptConfig() if cfg is None else cfg
    plan = plan_task(task=task, old_data=old_data, delta_old=delta_old)
    new_context = context_for_plan(context=context, plan=plan, init_seed=cfg.init_seed)
    return _run(
        objective=batch_objective(context=new_context, plan=plan),
        context=new_context,
        w0=_start_point(context=new_context, cfg=cfg, warm_start=None),
        cfg=cfg,
        method=BATCH,
        memory_fraction=1.0,
        optimizer_cfg=cfg.optimizer,
    )


def _kprior_weight_term(
        base: Model,
        plan: TaskPlan,
        new_context: ModelContext,
        anchored: bool,
    ) -> Tuple[WeightDivergenceSpec, Optional[np.ndarray], Optional[np.ndarray]]:
    """Returns (weight_div, anchor, warm_start) for the K-prior of `plan`"""
    base_weights = np.asarray(base.weights, dtype=float)
    if not anchored:
        divergence = TwoGenerator(gamma_new=plan.delta_new, delta_old=0.0)
    elif plan.delta_new != plan.delta_old:
        divergence = TwoGenerator(gamma_new=plan.delta_new, delta_old=plan.delta_old)
    else:
        divergence = L2Shift(delta=plan.delta_old)
    if not plan.changes_model_class:
        return divergence, base_weights, base_weights
    if isinstance(base, GlmModel) and isinstance(new_context, GlmContext) and is_nested(new_context.feature_map, base.feature_map):
        mapped = prefix_projection(new_map=new_context.feature_map, old_map=base.feature_map) @ base_weights
        return divergence, mapped, mapped
    if isinstance(base, MlpModel) and isinstance(new_context, MlpContext) and new_context.spec == base.spec:
        return divergence, base_weights, base_weights
    LOGGER.info("Model classes are not nested; the K-prior keeps only its functional term")
    return None, None, None


def adapt_kprior(
        task: AdaptationTask,
        base: Model,
        old_data: LabeledData,
        memory: MemorySet,
        delta_old: float,
        cfg: Optional[AdaptConfig] = None,
        anchored: bool = True,
    ) -> AdaptOutcome:
    """
    Adapts `base` by minimising the task's K-prior objective.

    - add data: l_new(w) + K(w)
    - remove data: -l_removed(w) + K(w), flagged non-converged if the objective falls below -1e6
    - change regularizer: K(w) with the two-generator divergence (delta_new, delta_old)
    - change model class: functional term of the new model at the memory inputs plus the weight term at
      A w* for nested GLM feature maps (functional term only otherwise)

    `anchored=False` replaces the weight-space term by (delta_new/2)||w||^2.
    Warm-starts at w* (or A w*) unless `cfg.random_init`.
    """
    cfg = AdaptConfig() if cfg is None else cfg
    plan = plan_task(task=task, old_data=old_data, delta_old=delta_old)
    context = context_of(model=base)
    new_context = context_for_plan(context=context, plan=plan, init_seed=cfg.init_seed)
    divergence, anchor, warm_start = _kprior_weight_term(base=base, plan=plan, new_context=new_context, anchored=anchored)
    objective = kprior_objective(
        context=new_context,
        plan=plan,
        base_weights=base.weights,
        memory=memory,
        weight_div=divergence,
        anchor=anchor,
        tau=cfg.tau,
        kd_lambda=cfg.kd_lambda,
        temperature=cfg.temperature,
    )
    return _run(
        objective=objective,
        context=new_context,
        w0=_start_point(context=new_context, cfg=cfg, warm_start=warm_start),
        cfg=cfg,
        method=KPRIOR if anchored else KPRIOR_NO_ANCHOR,
        memory_fraction=memory.fraction,
        optimizer_cfg=_with_floor(plan=plan, cfg=cfg.optimizer),
    )


def adapt_replay(
        task: AdaptationTask,
        base: Model,
        old_data: LabeledData,
        memory: MemorySet,
        delta_old: float,
        cfg: Optional[AdaptConfig] = None,
    ) -> AdaptOutcome:
    """Retrains on the memory (true labels) plus the new rows, warm-started at w* when the model class is unchanged"""
    cfg = AdaptConfig() if cfg is None else cfg
    plan = plan_task(task=task, old_data=old_data, delta_old=delta_old)
    new_context = context_for_plan(context=context_of(model=base), plan=plan, init_seed=cfg.init_seed)
    replay_tau = 1.0
    if cfg.replay_tau == REPLAY_TAU_RATIO:
        replay_tau = old_data.num_examples / max(memory.size, 1)
    warm_start = None if plan.changes_model_class else base.weights
    return _run(
        objective=replay_objective(context=new_context, plan=plan, memory=memory, replay_tau=replay_tau),
        context=new_context,
        w0=_start_point(context=new_context, cfg=cfg, warm_start=warm_start),
        cfg=cfg,
        method=REPLAY,
        memory_fraction=memory.fraction,
        optimizer_cfg=cfg.optimizer,
    )


def adapt_weight_prior(
        task: AdaptationTask,
        base: Model,
        ggn_full: np.ndarray,
        delta: float,
        cfg: Optional[AdaptConfig] = None,
    ) -> AdaptOutcome:
    """
    Minimises l_new(w) + 1/2 (w - w*)^T [G + delta I] (w - w*). Only the add-data task is supported;
    other tasks raise UnsupportedTaskError.
    """
    cfg = AdaptConfig() if cfg is None else cfg
    if not isinstance(task, AddData):
        raise UnsupportedTaskError(f"Weight-priors only support the '{ADD_DATA}' task, but got '{task.kind}'")
    context = context_of(model=base)
    plan = plan_task(task=task, old_data=LabeledData.empty(input_dim=task.new.input_dim), delta_old=delta)
    return _run(
        objective=weight_prior_objective(context=context, plan=plan, base_weights=base.weights, ggn_full=ggn_full),
        context=context,
        w0=_start_point(context=context, cfg=cfg, warm_start=base.weights),
        cfg=cfg,
        method=WEIGHT_PRIOR,
        memory_fraction=0.0,
        optimizer_cfg=cfg.optimizer,
    )


def train_base_model(
        context: ModelContext,
        data: LabeledData,
        delta: float,
        cfg: Optional[AdaptConfig] = None,
    ) -> Tuple[Model, AdaptOutcome]:
    """Trains the base model w* on the old data. Returns the tuple (model, outcome)."""
    cfg = AdaptConfig() if cfg is None else cfg
    context.validate_labels(labels=data.labels)
    objective = Objective(
        blocks=(data_block(context=context, data=data, name="data"),),
        weight_term=l2_term(delta=delta),
        num_params=context.num_params,
    )
    outcome = _run(
        objective=objective,
        context=context,
        w0=context.initial_weights(),
        cfg=replace(cfg, targets=()),
        method=BATCH,
        memory_fraction=1.0,
        optimizer_cfg=cfg.optimizer,
    )
    if not outcome.converged:
        LOGGER.warning(f"Base model did not converge: {outcome.message}")
    return context.make_model(w=outcome.weights), outcome

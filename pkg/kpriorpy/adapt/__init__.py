from kpriorpy.adapt.diagnostics import distance_to_batch, equal_cost_memory_size, stale_mean_diagnostic
from kpriorpy.adapt.methods import (
    AdaptConfig,
    adapt_kprior,
    adapt_replay,
    adapt_weight_prior,
    solve_batch,
    train_base_model,
)
from kpriorpy.adapt.model_context import GlmContext, MlpContext, ModelContext, make_context
from kpriorpy.adapt.tasks import (
    AdaptOutcome,
    AddData,
    ChangeModelClass,
    ChangeRegularizer,
    CompositeTask,
    RemoveData,
    plan_task,
)

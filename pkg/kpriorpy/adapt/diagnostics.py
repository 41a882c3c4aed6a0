from typing import List, Tuple, Union
import math

import numpy as np

from kpriorpy.adapt.model_context import ModelContext
from kpriorpy.core.exceptions import DimensionMismatchError
from kpriorpy.glm.models import GlmModel, LabeledData
from kpriorpy.mlp.network import MlpModel


def stale_mean_diagnostic(
        base: Union[GlmModel, MlpModel],
        candidate_w: np.ndarray,
        data: LabeledData,
    ) -> List[Tuple[float, float]]:
    """
    Pairs (h'(f_{w*}(x_i)), h'(f_w(x_i))) for every row: the curvature a weight-prior keeps frozen at w*
    against the value at the candidate weights. Points off the diagonal are where the frozen value is stale.
    """
    candidate = base.with_weights(weights=candidate_w)
    stale = base.selection_scores(base.logits(data.inputs))
    fresh = candidate.selection_scores(candidate.logits(data.inputs))
    return [(float(old), float(new)) for old, new in zip(stale, fresh)]


def distance_to_batch(
        w_a: np.ndarray,
        w_b: np.ndarray,
        eval_data: LabeledData,
        model_ctx: ModelContext,
    ) -> Tuple[float, float, float]:
    """
    Returns the tuple (linf, l2, pred_disagreement): the infinity-norm and 2-norm of w_a - w_b and the
    fraction of `eval_data` rows whose hard prediction differs between the two weight vectors.
    """
    w_a = np.asarray(w_a, dtype=float).reshape(-1)
    w_b = np.asarray(w_b, dtype=float).reshape(-1)
    if w_a.shape != w_b.shape:
        raise DimensionMismatchError(f"Expected weights of equal length, but got {w_a.shape[0]} and {w_b.shape[0]}")
    difference = w_a - w_b
    linf = float(np.max(np.abs(difference), initial=0.0))
    l2 = float(np.linalg.norm(difference))
    if eval_data.num_examples == 0:
        return linf, l2, 0.0
    predictions_a = model_ctx.predict_labels(w=w_a, inputs=eval_data.inputs)
    predictions_b = model_ctx.predict_labels(w=w_b, inputs=eval_data.inputs)
    return linf, l2, float(np.mean(predictions_a != predictions_b))


def equal_cost_memory_size(num_params: int, input_dim: int) -> int:
    """
    Memory size whose storage matches a weight-prior's: the symmetric P x P matrix G costs P(P+1)/2 numbers
    and each memory point costs its D inputs plus one soft logit.

    >>> equal_cost_memory_size(num_params=7, input_dim=2) # Returns 10
    """
    return int(math.ceil(num_params * (num_params + 1) / 2 / (input_dim + 1)))

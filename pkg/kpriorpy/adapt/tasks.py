"""
Adaptation tasks and their normalised form.

Every task is reduced to a `TaskPlan`: the old rows that are kept, the rows that are added, the rows
that are removed, the old and new regularizer strengths and (for a model-class change) the new
architecture. The adaptation methods only look at the plan.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from kpriorpy.core.exceptions import (
    DimensionMismatchError,
    InvalidDataError,
    UnsupportedTaskError,
)
from kpriorpy.core.utils import create_string_repr
from kpriorpy.glm.features import FeatureMap
from kpriorpy.glm.models import LabeledData
from kpriorpy.mlp.network import MlpSpec

ADD_DATA = "add-data"
REMOVE_DATA = "remove-data"
CHANGE_REGULARIZER = "change-regularizer"
CHANGE_MODEL_CLASS = "change-model-class"
COMPOSITE = "composite"
TASK_KINDS = [ADD_DATA, REMOVE_DATA, CHANGE_REGULARIZER, CHANGE_MODEL_CLASS, COMPOSITE]

Architecture = Union[FeatureMap, MlpSpec]


@dataclass(frozen=True)
class AddData:
    new: LabeledData
    kind: str = field(default=ADD_DATA, init=False)


@dataclass(frozen=True)
class RemoveData:
    """`indices` are row indices into the old data"""
    indices: Tuple[int, ...]
    kind: str = field(default=REMOVE_DATA, init=False)

    def __post_init__(self) -> None:
        indices = tuple(int(index) for index in np.asarray(self.indices, dtype=int).reshape(-1))
        if len(set(indices)) != len(indices):
            raise InvalidDataError("Expected the indices of RemoveData to be unique")
        if any(index < 0 for index in indices):
            raise InvalidDataError("Expected the indices of RemoveData to be >= 0")
        object.__setattr__(self, 'indices', indices)


@dataclass(frozen=True)
class ChangeRegularizer:
    delta_new: float
    kind: str = field(default=CHANGE_REGULARIZER, init=False)

    def __post_init__(self) -> None:
        if not self.delta_new >= 0:
            raise ValueError(f"Expected `delta_new` >= 0, but got {self.delta_new}")


@dataclass(frozen=True)
class ChangeModelClass:
    """`new_map` is a FeatureMap for GLMs or an MlpSpec for MLPs"""
    new_map: Architecture
    kind: str = field(default=CHANGE_MODEL_CLASS, init=False)


@dataclass(frozen=True)
class CompositeTask:
    """Any combination of adding data, removing data and changing the regularizer, applied together"""
    add: Optional[AddData] = None
    remove: Optional[RemoveData] = None
    regularizer: Optional[ChangeRegularizer] = None
    kind: str = field(default=COMPOSITE, init=False)

    def __post_init__(self) -> None:
        if self.add is None and self.remove is None and self.regularizer is None:
            raise UnsupportedTaskError("A composite task needs at least one component")


AdaptationTask = Union[AddData, RemoveData, ChangeRegularizer, ChangeModelClass, CompositeTask]


@dataclass(frozen=True)
class TaskPlan:
    kind: str
    kept_old: LabeledData
    new_data: LabeledData
    removed: LabeledData
    removed_indices: Tuple[int, ...]
    delta_old: float
    delta_new: float
    new_architecture: Optional[Architecture] = None

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={
                'kind': self.kind,
                'kept_old': self.kept_old.num_examples,
                'new': self.new_data.num_examples,
                'removed': self.removed.num_examples,
                'delta_old': self.delta_old,
                'delta_new': self.delta_new,
            },
        )

    @property
    def final_data(self) -> LabeledData:
        """The data of the adapted objective: kept old rows followed by the new rows"""
        return self.kept_old.concat(self.new_data)

    @property
    def changes_model_class(self) -> bool:
        return self.new_architecture is not None


def _validate_removal(indices: Sequence[int], old_data: LabeledData) -> None:
    if any(index >= old_data.num_examples for index in indices):
        raise InvalidDataError(f"RemoveData indices must be < N={old_data.num_examples}")
    return None


def plan_task(
        task: AdaptationTask,
        old_data: LabeledData,
        delta_old: float,
    ) -> TaskPlan:
    """Normalises `task` against the old data and the old regularizer strength"""
    empty = LabeledData.empty(input_dim=old_data.input_dim)
    components = [task] if not isinstance(task, CompositeTask) else [
        component for component in (task.add, task.remove, task.regularizer) if component is not None
    ]
    new_data, removed_indices, delta_new, new_architecture = empty, (), delta_old, None
    for component in components:
        if isinstance(component, AddData):
            if component.new.input_dim != old_data.input_dim:
                raise DimensionMismatchError(
                    f"New data has input dim {component.new.input_dim}, old data has {old_data.input_dim}"
                )
            new_data = component.new
        elif isinstance(component, RemoveData):
            _validate_removal(indices=component.indices, old_data=old_data)
            removed_indices = tuple(sorted(component.indices))
        elif isinstance(component, ChangeRegularizer):
            delta_new = float(component.delta_new)
        elif isinstance(component, ChangeModelClass):
            new_architecture = component.new_map
        else:
            raise UnsupportedTaskError(f"Unknown adaptation task {component!r}")
    return TaskPlan(
        kind=task.kind,
        kept_old=old_data.drop(indices=list(removed_indices)),
        new_data=new_data,
        removed=old_data.take(indices=list(removed_indices)) if removed_indices else empty,
        removed_indices=removed_indices,
        delta_old=float(delta_old),
        delta_new=delta_new,
        new_architecture=new_architecture,
    )


@dataclass(frozen=True)
class AdaptOutcome:
    weights: np.ndarray
    grad_evals: int
    wall_time_ms: float
    converged: bool
    method: str
    memory_fraction: float
    backprops: int = 0
    final_objective: float = float('nan')
    iters: int = 0
    message: str = ""
    targets_reached: Tuple[Tuple[float, Optional[int]], ...] = ()

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={
                'method': self.method,
                'memory_fraction': self.memory_fraction,
                'grad_evals': self.grad_evals,
                'converged': self.converged,
            },
        )

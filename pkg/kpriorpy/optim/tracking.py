from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from kpriorpy.core.type_annotations import Oracle
from kpriorpy.optim.quasi_newton import (
    OptimizerConfig,
    OptimResult,
    minimize,
)

AccuracyProbe = Callable[[np.ndarray], float]


class TargetTracker:
    """
    Records, for each target accuracy, the cumulative cost at which the probe first reached it.
    Instances are used as the `callback` of `minimize` (and of the minibatch trainer).

    >>> tracker = TargetTracker(probe=accuracy_on_test_set, targets=[0.9, 0.95])
    >>> tracker.observe(w=w0, cost=0)
    >>> minimize(oracle, w0, cfg, callback=tracker)
    >>> tracker.results() # Returns [(0.9, 120), (0.95, None)]
    """

    def __init__(self, probe: AccuracyProbe, targets: Sequence[float]) -> None:
        self.__probe = probe
        self.__targets = [float(target) for target in targets]
        self.__reached: Dict[float, int] = {}

    def __call__(self, w: np.ndarray, cost: int) -> None:
        self.observe(w=w, cost=cost)

    def observe(self, w: np.ndarray, cost: int) -> None:
        pending = [target for target in self.__targets if target not in self.__reached]
        if not pending:
            return None
        accuracy = float(self.__probe(w))
        for target in pending:
            if accuracy >= target:
                self.__reached[target] = int(cost)
        return None

    def results(self) -> List[Tuple[float, Optional[int]]]:
        """List of (target, cost), where cost is None if the target was never reached"""
        return [(target, self.__reached.get(target)) for target in self.__targets]


def target_accuracy_run(
        oracle: Oracle,
        w0: np.ndarray,
        cfg: OptimizerConfig,
        probe: AccuracyProbe,
        targets: Sequence[float],
        cost_per_eval: int = 1,
    ) -> List[Tuple[float, Optional[int]]]:
    """
    Runs `minimize` and returns, for each target accuracy, the cumulative number of gradient evaluations
    (scaled by `cost_per_eval`) at which `probe(w) >= target` first held. Targets met at w0 get 0;
    unreachable targets get None.
    """
    results, _ = target_accuracy_run_with_result(
        oracle=oracle,
        w0=w0,
        cfg=cfg,
        probe=probe,
        targets=targets,
        cost_per_eval=cost_per_eval,
    )
    return results


def target_accuracy_run_with_result(
        oracle: Oracle,
        w0: np.ndarray,
        cfg: OptimizerConfig,
        probe: AccuracyProbe,
        targets: Sequence[float],
        cost_per_eval: int = 1,
    ) -> Tuple[List[Tuple[float, Optional[int]]], OptimResult]:
    """Same as `target_accuracy_run`, but also returns the OptimResult of the run"""
    tracker = TargetTracker(probe=probe, targets=targets)
    tracker.observe(w=np.asarray(w0, dtype=float), cost=0)
    result = minimize(
        objective_and_gradient=oracle,
        w0=w0,
        cfg=cfg,
        callback=tracker,
        cost_per_eval=cost_per_eval,
    )
    return tracker.results(), result

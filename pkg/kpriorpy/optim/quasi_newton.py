"""
Deterministic limited-memory quasi-Newton (L-BFGS) minimizer.

The search direction comes from the standard two-loop recursion over the last `history` curvature
pairs; step lengths come from scipy's strong-Wolfe line search. Every call to the
objective-and-gradient oracle is counted, which is how the benchmark measures the cost of training.
"""

from collections import deque
from dataclasses import dataclass
from typing import Callable, Deque, Dict, Optional, Tuple
import warnings

import numpy as np
from scipy.optimize import line_search

from kpriorpy.core.exceptions import NonFiniteObjectiveError
from kpriorpy.core.logging_ops import get_logger_object
from kpriorpy.core.type_annotations import Oracle
from kpriorpy.core.utils import create_string_repr

LOGGER = get_logger_object(logger_name=__name__)

MAX_LINE_SEARCH_ITERS = 50
IterationCallback = Callable[[np.ndarray, int], None]


@dataclass(frozen=True)
class OptimizerConfig:
    grad_tol: float = 1e-8
    max_iters: int = 5000
    history: int = 10
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    objective_floor: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.wolfe_c1 < self.wolfe_c2 < 1.0:
            raise ValueError(f"Expected 0 < wolfe_c1 < wolfe_c2 < 1, but got c1={self.wolfe_c1}, c2={self.wolfe_c2}")
        if self.grad_tol <= 0:
            raise ValueError(f"Expected `grad_tol` > 0, but got {self.grad_tol}")
        if self.max_iters < 0:
            raise ValueError(f"Expected `max_iters` >= 0, but got {self.max_iters}")
        if self.history < 1:
            raise ValueError(f"Expected `history` >= 1, but got {self.history}")

    def __str__(self) -> str:
        return create_string_repr(
            instance=self,
            kwargs_dict={'grad_tol': self.grad_tol, 'max_iters': self.max_iters, 'history': self.history},
        )


@dataclass(frozen=True)
class OptimResult:
    weights: np.ndarray
    value: float
    grad_inf_norm: float
    iters: int
    grad_evals: int
    converged: bool
    backprops: int = 0
    message: str = ""


class _CountingOracle:
    """Wraps an oracle with call counting and a single-entry cache (the line search asks for f and f' at the same point)"""

    def __init__(self, oracle: Oracle) -> None:
        self.__oracle = oracle
        self.__cache: Dict[str, object] = {}
        self.num_calls = 0

    def __call__(self, w: np.ndarray) -> Tuple[float, np.ndarray]:
        key = w.tobytes()
        if self.__cache.get('key') == key:
            return self.__cache['value'], self.__cache['grad']
        value, grad = self.__oracle(w)
        self.num_calls += 1
        value = float(value)
        grad = np.asarray(grad, dtype=float)
        if not np.isfinite(value) or not np.all(np.isfinite(grad)):
            raise NonFiniteObjectiveError(f"Oracle returned a non-finite value/gradient (value={value}) at call {self.num_calls}")
        self.__cache = {'key': key, 'value': value, 'grad': grad}
        return value, grad

    def value(self, w: np.ndarray) -> float:
        return self(w)[0]

    def gradient(self, w: np.ndarray) -> np.ndarray:
        return self(w)[1]


def _two_loop_direction(
        grad: np.ndarray,
        s_history: Deque[np.ndarray],
        y_history: Deque[np.ndarray],
    ) -> np.ndarray:
    """Returns -H grad, with H the L-BFGS inverse-Hessian approximation"""
    q = grad.copy()
    alphas = []
    for s, y in zip(reversed(s_history), reversed(y_history)):
        rho = 1.0 / float(y @ s)
        alpha = rho * float(s @ q)
        q -= alpha * y
        alphas.append((rho, alpha))
    if s_history:
        s, y = s_history[-1], y_history[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y), (rho, alpha) in zip(zip(s_history, y_history), reversed(alphas)):
        beta = rho * float(y @ q)
        q += (alpha - beta) * s
    return -q


def minimize(
        objective_and_gradient: Oracle,
        w0: np.ndarray,
        cfg: Optional[OptimizerConfig] = None,
        callback: Optional[IterationCallback] = None,
        cost_per_eval: int = 1,
    ) -> OptimResult:
    """
    Minimizes a smooth objective given by an oracle w -> (value, gradient).

    Parameters:
        - objective_and_gradient (callable): The oracle. NaN/inf output raises NonFiniteObjectiveError.
        - w0 (array): Starting point.
        - cfg (OptimizerConfig): Tolerances and iteration limits (optional).
        - callback (callable): Called as callback(w, backprops) after every accepted iterate (optional).
        - cost_per_eval (int): Examples touched per oracle call; `backprops = grad_evals * cost_per_eval`.

    A failed line search first retries along steepest descent with a fresh history; if that also
    fails the best iterate so far is returned with converged=False.
    """
    cfg = OptimizerConfig() if cfg is None else cfg
    oracle = _CountingOracle(oracle=objective_and_gradient)
    w = np.array(w0, dtype=float).reshape(-1)
    value, grad = oracle(w)
    s_history: Deque[np.ndarray] = deque(maxlen=cfg.history)
    y_history: Deque[np.ndarray] = deque(maxlen=cfg.history)
    iters = 0
    message = "max_iters reached"
    converged = bool(np.max(np.abs(grad), initial=0.0) <= cfg.grad_tol)
    if converged:
        message = "converged"
    while not converged and iters < cfg.max_iters:
        direction = _two_loop_direction(grad=grad, s_history=s_history, y_history=y_history)
        if float(grad @ direction) >= 0:
            s_history.clear()
            y_history.clear()
            direction = -grad
        step = _wolfe_step(oracle=oracle, w=w, value=value, grad=grad, direction=direction, cfg=cfg, fresh=not s_history)
        if step is None and s_history:
            LOGGER.debug(f"Line search failed at iteration {iters}; retrying along steepest descent")
            s_history.clear()
            y_history.clear()
            step = _wolfe_step(oracle=oracle, w=w, value=value, grad=grad, direction=-grad, cfg=cfg, fresh=True)
        if step is None:
            message = "line search failed"
            LOGGER.warning(f"Line search failed after {iters} iterations (grad_inf_norm={np.max(np.abs(grad)):.3e})")
            break
        w_new, value_new, grad_new = step
        s, y = w_new - w, grad_new - grad
        if float(s @ y) > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            s_history.append(s)
            y_history.append(y)
        w, value, grad = w_new, value_new, grad_new
        iters += 1
        if callback is not None:
            callback(w.copy(), oracle.num_calls * cost_per_eval)
        LOGGER.debug(f"iter={iters} value={value:.12e} grad_inf_norm={np.max(np.abs(grad)):.3e}")
        if np.max(np.abs(grad), initial=0.0) <= cfg.grad_tol:
            converged = True
            message = "converged"
        elif cfg.objective_floor is not None and value < cfg.objective_floor:
            message = "objective fell below floor"
            LOGGER.warning(f"Objective {value:.6e} fell below the floor {cfg.objective_floor:.3e}; aborting")
            break
    if not converged:
        LOGGER.info(f"Optimizer stopped without converging: {message}")
    return OptimResult(
        weights=w,
        value=value,
        grad_inf_norm=float(np.max(np.abs(grad), initial=0.0)),
        iters=iters,
        grad_evals=oracle.num_calls,
        converged=converged,
        backprops=oracle.num_calls * cost_per_eval,
        message=message,
    )


def _wolfe_step(
        oracle: _CountingOracle,
        w: np.ndarray,
        value: float,
        grad: np.ndarray,
        direction: np.ndarray,
        cfg: OptimizerConfig,
        fresh: bool,
    ) -> Optional[Tuple[np.ndarray, float, np.ndarray]]:
    """
    Returns (w_new, value_new, grad_new) from a strong-Wolfe step along `direction`, or None on failure.
    Near the optimum the Armijo test can be defeated by round-off; there a unit step is still taken
    if it does not increase the objective and shrinks the gradient.
    """
    # scipy's initial-step heuristic for a direction with no curvature information
    old_old_value = value + float(np.linalg.norm(grad)) / 2.0 if fresh else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=RuntimeWarning)
        alpha, _, _, _, _, _ = line_search(
            f=oracle.value,
            myfprime=oracle.gradient,
            xk=w,
            pk=direction,
            gfk=grad,
            old_fval=value,
            old_old_fval=old_old_value,
            c1=cfg.wolfe_c1,
            c2=cfg.wolfe_c2,
            maxiter=MAX_LINE_SEARCH_ITERS,
        )
    if alpha is not None:
        w_new = w + alpha * direction
        value_new, grad_new = oracle(w_new)
        if value_new <= value:
            return w_new, value_new, grad_new
    if np.max(np.abs(grad)) > max(1e3 * cfg.grad_tol, 1e-6):
        return None
    w_new = w + direction
    value_new, grad_new = oracle(w_new)
    if value_new <= value and np.max(np.abs(grad_new)) < np.max(np.abs(grad)):
        return w_new, value_new, grad_new
    return None

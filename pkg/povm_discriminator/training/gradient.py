"""Forward-difference gradients of the cost."""

import math
from typing import Callable

import numpy as np

from povm_discriminator.errors import DomainError, NumericError
from povm_discriminator.model.ensemble import Ensemble, OutcomeAssignment
from povm_discriminator.model.training import EXACT, CostConfig, EvaluationMode
from povm_discriminator.training.cost import draw_minibatch, evaluate_j1_stack


def _check_step(step: float) -> None:
    if not step > 0:
        raise DomainError(f"gradient step must be positive, got {step}")


def forward_diff_gradient(
    f: Callable[[np.ndarray], float], params: np.ndarray, step: float
) -> np.ndarray:
    """(f(x + step e_j) - f(x)) / step for every j; exactly len(x) + 1 calls of f."""
    _check_step(step)
    params = np.array(params, dtype=float)
    base = f(params)
    if not math.isfinite(base):
        raise NumericError(f"cost is {base} at the base point", component=None)
    grad = np.empty(params.size)
    for j in range(params.size):
        shifted = params.copy()
        shifted[j] += step
        value = f(shifted)
        if not math.isfinite(value):
            raise NumericError(f"cost is {value} after shifting angle {j}", component=j)
        grad[j] = (value - base) / step
    return grad


def shifted_rows(params: np.ndarray, step: float) -> np.ndarray:
    """The base point followed by x + step e_j for every j, as a (P + 1) x P matrix."""
    params = np.array(params, dtype=float)
    rows = np.tile(params, (params.size + 1, 1))
    rows[np.arange(1, params.size + 1), np.arange(params.size)] += step
    return rows


def stacked_forward_diff_gradient(
    f_rows: Callable[[np.ndarray], np.ndarray], params: np.ndarray, step: float
) -> np.ndarray:
    """forward_diff_gradient with all P + 1 points passed to ``f_rows`` in one call."""
    _check_step(step)
    values = np.asarray(f_rows(shifted_rows(params, step)), dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        first = int(bad[0])
        if first == 0:
            raise NumericError(f"cost is {values[0]} at the base point", component=None)
        raise NumericError(
            f"cost is {values[first]} after shifting angle {first - 1}", component=first - 1
        )
    return (values[1:] - values[0]) / step


def minibatch_gradient(
    params: np.ndarray,
    ensemble: Ensemble,
    cost: CostConfig,
    minibatch_size: int,
    step: float,
    rng: np.random.Generator,
    mode: EvaluationMode = EXACT,
    assignment: OutcomeAssignment | None = None,
) -> np.ndarray:
    """Forward-difference gradient of the cost on one random minibatch.

    All P + 1 circuits are simulated in one batched pass. In sampled mode
    every cost evaluation draws fresh shots from ``rng``.
    """
    assignment = assignment or OutcomeAssignment()
    batches = draw_minibatch(ensemble, minibatch_size, rng)

    def minibatch_costs(rows: np.ndarray) -> np.ndarray:
        return evaluate_j1_stack(rows, batches, cost, assignment, mode, rng)

    return stacked_forward_diff_gradient(minibatch_costs, params, step)

"""The discrimination cost J1 and ensemble metrics as functions of the angles.

J1 = scale * sum_i [ mean(1 - P_suc) + alpha_err mean(P_err) + alpha_inc mean(P_inc) ]

with the means taken over each family's sample set. Unlike the aggregate
metrics, J1 carries no prior weights.
"""

from dataclasses import dataclass

import numpy as np

from povm_discriminator.circuit.topology import (
    CircuitParams,
    isometry_stack,
)
from povm_discriminator.discrimination import (
    family_table_from_isometry,
    metrics_from_partitions,
    partition_table,
)
from povm_discriminator.errors import ArityError
from povm_discriminator.model.ensemble import (
    Ensemble,
    Family,
    Label,
    Metrics,
    OutcomeAssignment,
)
from povm_discriminator.model.training import EXACT, CostConfig, EvaluationMode
from povm_discriminator.sampling import estimated_table_from_isometry

ParamsLike = CircuitParams | np.ndarray


@dataclass(frozen=True, eq=False)
class Batch:
    """Sample points of one family that enter a cost evaluation."""

    family: Family
    label: Label
    samples: np.ndarray


def full_batches(ensemble: Ensemble) -> list[Batch]:
    """Every sample of every family."""
    if not ensemble:
        raise ArityError("ensemble is empty")
    return [
        Batch(m.spec.family, m.spec.label, np.array(m.samples, dtype=float))
        for m in ensemble
    ]


def draw_minibatch(ensemble: Ensemble, size: int, rng: np.random.Generator) -> list[Batch]:
    """Per family, ``size`` uniform draws with replacement (whole set if smaller)."""
    batches = []
    for batch in full_batches(ensemble):
        if size < batch.samples.size:
            picks = rng.integers(0, batch.samples.size, size=size)
            batch = Batch(batch.family, batch.label, batch.samples[picks])
        batches.append(batch)
    return batches


def _angles(params: ParamsLike) -> np.ndarray:
    return params.angles if isinstance(params, CircuitParams) else np.asarray(params, dtype=float)


def _tables(
    isometry: np.ndarray,
    batches: list[Batch],
    mode: EvaluationMode,
    rng: np.random.Generator | None,
) -> list[np.ndarray]:
    if not mode.sampled:
        return [family_table_from_isometry(isometry, b.family, b.samples) for b in batches]
    if rng is None:
        raise ValueError("sampled evaluation needs a random source")
    return [
        estimated_table_from_isometry(isometry, b.family, b.samples, mode.shots, rng)
        for b in batches
    ]


def j1_from_partitions(partitions: list[np.ndarray], cost: CostConfig) -> float | np.ndarray:
    """J1 from per-family (... x n x 3) arrays of (p_suc, p_err, p_inc).

    Leading axes are kept, so a stack of K evaluations gives K costs.
    """
    total = 0.0
    for partition in partitions:
        suc, err, inc = np.moveaxis(partition.mean(axis=-2), -1, 0)
        total = total + (1.0 - suc) + cost.alpha_err * err + cost.alpha_inc * inc
    if np.ndim(total) == 0:
        return cost.scale * float(total)
    return cost.scale * total


def _j1(
    isometry: np.ndarray,
    batches: list[Batch],
    cost: CostConfig,
    assignment: OutcomeAssignment,
    mode: EvaluationMode,
    rng: np.random.Generator | None,
) -> float | np.ndarray:
    tables = _tables(isometry, batches, mode, rng)
    partitions = [partition_table(t, b.label, assignment) for t, b in zip(tables, batches)]
    return j1_from_partitions(partitions, cost)


def evaluate_j1(
    params: ParamsLike,
    batches: list[Batch],
    cost: CostConfig,
    assignment: OutcomeAssignment,
    mode: EvaluationMode = EXACT,
    rng: np.random.Generator | None = None,
) -> float:
    """J1 over the given batches, exact or from fresh shots."""
    return _j1(isometry_stack(_angles(params))[0], batches, cost, assignment, mode, rng)


def evaluate_j1_stack(
    param_rows: np.ndarray,
    batches: list[Batch],
    cost: CostConfig,
    assignment: OutcomeAssignment,
    mode: EvaluationMode = EXACT,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """J1 for every row of a K x P angle matrix.

    Exact mode evaluates all rows in one batched pass. Sampled mode draws
    shots for the rows in order, as K calls of ``evaluate_j1`` would.
    """
    isometries = isometry_stack(param_rows)
    if not mode.sampled:
        return np.asarray(_j1(isometries, batches, cost, assignment, mode, rng), dtype=float)
    return np.array([_j1(iso, batches, cost, assignment, mode, rng) for iso in isometries])


def cost_j1(
    params: ParamsLike,
    ensemble: Ensemble,
    cost: CostConfig,
    assignment: OutcomeAssignment | None = None,
) -> float:
    """Exact J1 over the whole ensemble."""
    return evaluate_j1(params, full_batches(ensemble), cost, assignment or OutcomeAssignment())


def ensemble_metrics(
    params: ParamsLike, ensemble: Ensemble, assignment: OutcomeAssignment | None = None
) -> Metrics:
    """Prior-weighted aggregate metrics of the circuit with these angles."""
    return exact_summary(params, ensemble, CostConfig(), assignment)[1]


def exact_summary(
    params: ParamsLike,
    ensemble: Ensemble,
    cost: CostConfig,
    assignment: OutcomeAssignment | None = None,
) -> tuple[float, Metrics]:
    """Exact J1 and aggregate metrics from a single circuit evaluation."""
    assignment = assignment or OutcomeAssignment()
    batches = full_batches(ensemble)
    tables = _tables(isometry_stack(_angles(params))[0], batches, EXACT, None)
    partitions = [partition_table(t, b.label, assignment) for t, b in zip(tables, batches)]
    return j1_from_partitions(partitions, cost), metrics_from_partitions(ensemble, partitions)

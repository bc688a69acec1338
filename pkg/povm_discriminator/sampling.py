"""Finite-shot estimation of outcome probabilities.

Counts are exact multinomial draws. A psi23 input first splits its shots
between the two sign branches with a fair coin per shot, then draws each
branch's counts from that branch's outcome distribution.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from povm_discriminator.circuit.topology import (
    DiscriminatorCircuit,
    input_isometry,
    outcome_table_from_isometry,
)
from povm_discriminator.discrimination import branch_amplitudes, partition_table
from povm_discriminator.errors import DomainError
from povm_discriminator.model.ensemble import (
    Family,
    FamilySamples,
    LabeledInput,
    Metrics,
    OutcomeAssignment,
)
from povm_discriminator.model.state import OutcomeDistribution


@dataclass(frozen=True)
class ShotPlan:
    """Number of repeated measurements and the seed of their random source."""

    shots: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise DomainError(f"shots must be at least 1, got {self.shots}")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _multinomial(shots: int | np.ndarray, probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    pvals = np.clip(probs, 0.0, None)
    pvals = pvals / pvals.sum(axis=-1, keepdims=True)
    return rng.multinomial(shots, pvals)


def sample_outcome_counts(probs: OutcomeDistribution, plan: ShotPlan) -> np.ndarray:
    """Multinomial counts of ``plan.shots`` measurements; they sum to shots."""
    return _multinomial(plan.shots, probs.probs, plan.rng())


def estimated_probabilities(counts: np.ndarray) -> np.ndarray:
    """Relative frequencies counts / N along the last axis."""
    counts = np.asarray(counts, dtype=float)
    return counts / counts.sum(axis=-1, keepdims=True)


def shots_for_tolerance(epsilon: float) -> int:
    """Repetitions ceil(1 / epsilon**4) needed for cost precision epsilon."""
    if not epsilon > 0:
        raise DomainError(f"tolerance must be positive, got {epsilon}")
    # Decimal tolerances are taken at face value so 1e-3 gives exactly 10**12.
    exact = Fraction(repr(float(epsilon)))
    return math.ceil(1 / exact**4)


def estimated_table_from_isometry(
    isometry: np.ndarray,
    family: Family,
    samples: np.ndarray,
    shots: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Shot-estimated n x 4 outcome table for the samples of one family."""
    branches = [outcome_table_from_isometry(isometry, rows) for rows in branch_amplitudes(family, samples)]
    if len(branches) == 1:
        counts = _multinomial(shots, branches[0], rng)
    else:
        plus = rng.binomial(shots, 0.5, size=branches[0].shape[0])
        counts = _multinomial(plus, branches[0], rng) + _multinomial(shots - plus, branches[1], rng)
    return counts / float(shots)


def estimated_outcome_table(
    circuit: DiscriminatorCircuit,
    member: FamilySamples,
    shots: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Estimated outcome probabilities for every sample of a family."""
    if shots < 1:
        raise DomainError(f"shots must be at least 1, got {shots}")
    return estimated_table_from_isometry(
        input_isometry(circuit), member.spec.family, np.array(member.samples), shots, rng
    )


def estimated_metrics(
    circuit: DiscriminatorCircuit,
    labeled: LabeledInput,
    assignment: OutcomeAssignment,
    plan: ShotPlan,
) -> Metrics:
    """Metrics of one input from estimated rather than exact probabilities."""
    isometry = input_isometry(circuit)
    rng = plan.rng()
    if labeled.family is Family.PSI23:
        table = estimated_table_from_isometry(
            isometry, Family.PSI23, np.array([labeled.param]), plan.shots, rng
        )
    else:
        exact = outcome_table_from_isometry(isometry, labeled.state.amplitudes)
        table = _multinomial(plan.shots, exact, rng) / float(plan.shots)
    suc, err, inc = partition_table(table, labeled.true_label, assignment)[0]
    return Metrics(p_suc=float(suc), p_err=float(err), p_inc=float(inc))

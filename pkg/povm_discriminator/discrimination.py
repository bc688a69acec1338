"""State families, outcome labelling and success/error/inconclusive metrics.

Class 1 is the family psi1(a) = (sqrt(1 - a^2), 0, a, 0). Class 2 is the
equal mixture of psi2(b) and psi3(b) = (0, +-sqrt(1 - b^2), b, 0). Exact
metrics evaluate both sign branches with weight 1/2; sampled inputs draw
the sign instead.
"""

import numpy as np

from povm_discriminator.circuit.topology import (
    DiscriminatorCircuit,
    input_isometry,
    outcome_probabilities,
    outcome_table_from_isometry,
)
from povm_discriminator.errors import ArityError, AssignmentError, DomainError
from povm_discriminator.model.ensemble import (
    OUTCOME_LABELS,
    Distribution,
    Ensemble,
    Family,
    FamilySamples,
    Fixed,
    Label,
    LabeledInput,
    Metrics,
    Mixture,
    OutcomeAssignment,
    StateFamilySpec,
    TruncatedNormal,
    Uniform,
    check_priors,
)
from povm_discriminator.model.state import StateVector

# Rejection rounds before a truncated normal is declared unsampleable.
MAX_REJECTION_ROUNDS = 1000


def _check_unit(value: float, name: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")


def _psi1_rows(a: np.ndarray) -> np.ndarray:
    rows = np.zeros((a.size, 4), dtype=complex)
    rows[:, 0] = np.sqrt(np.clip(1.0 - a**2, 0.0, None))
    rows[:, 2] = a
    return rows


def _psi23_rows(sign: int, b: np.ndarray) -> np.ndarray:
    rows = np.zeros((b.size, 4), dtype=complex)
    rows[:, 1] = sign * np.sqrt(np.clip(1.0 - b**2, 0.0, None))
    rows[:, 2] = b
    return rows


def psi1(a: float) -> StateVector:
    """psi1(a) = (sqrt(1 - a^2), 0, a, 0)."""
    _check_unit(a, "a")
    return StateVector(amplitudes=_psi1_rows(np.array([a]))[0], num_qubits=2)


def psi23(sign: int, b: float) -> StateVector:
    """psi2 (sign=+1) or psi3 (sign=-1): (0, sign*sqrt(1 - b^2), b, 0)."""
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")
    _check_unit(b, "b")
    return StateVector(amplitudes=_psi23_rows(sign, np.array([b]))[0], num_qubits=2)


def _truncated_normal(dist: TruncatedNormal, n: int, rng: np.random.Generator) -> np.ndarray:
    if n == 0:
        return np.empty(0)
    accepted: list[np.ndarray] = []
    count = 0
    for _ in range(MAX_REJECTION_ROUNDS):
        if count >= n:
            break
        draws = rng.normal(dist.mu, dist.sigma, size=2 * (n - count))
        kept = draws[(draws >= dist.lo) & (draws <= dist.hi)]
        accepted.append(kept)
        count += kept.size
    if count < n:
        raise DomainError(
            f"truncated normal N({dist.mu}, {dist.sigma}) has negligible mass on "
            f"[{dist.lo}, {dist.hi}]"
        )
    return np.concatenate(accepted)[:n]


def draw_samples(distribution: Distribution, n: int, rng: np.random.Generator) -> tuple[float, ...]:
    """Draw ``n`` parameter values from ``distribution``."""
    if n < 0:
        raise ArityError(f"cannot draw {n} samples")
    if isinstance(distribution, Fixed):
        values = np.full(n, distribution.value)
    elif isinstance(distribution, Uniform):
        values = rng.uniform(distribution.lo, distribution.hi, size=n)
    elif isinstance(distribution, TruncatedNormal):
        values = _truncated_normal(distribution, n, rng)
    elif isinstance(distribution, Mixture):
        choice = rng.choice(len(distribution.components), size=n, p=distribution.weights)
        values = np.empty(n)
        for k, (_, component) in enumerate(distribution.components):
            slots = np.flatnonzero(choice == k)
            values[slots] = draw_samples(component, slots.size, rng)
    else:
        raise DomainError(f"unsupported distribution {type(distribution).__name__}")
    return tuple(float(v) for v in values)


def evenly_spaced(lo: float, hi: float, n: int) -> tuple[float, ...]:
    """``n`` evenly spaced points from lo to hi inclusive."""
    _check_unit(lo, "lo")
    _check_unit(hi, "hi")
    if n < 1:
        raise ArityError(f"need at least one point, got {n}")
    return tuple(float(v) for v in np.linspace(lo, hi, n))


def build_family_samples(spec: StateFamilySpec, n: int, rng: np.random.Generator) -> FamilySamples:
    """A sample set of ``n`` draws from the family's parameter law."""
    return FamilySamples(spec=spec, samples=draw_samples(spec.distribution, n, rng))


def sample_input(spec: StateFamilySpec, rng: np.random.Generator) -> LabeledInput:
    """Draw one labeled pure input; psi23 picks its sign with probability 1/2."""
    param = draw_samples(spec.distribution, 1, rng)[0]
    if spec.family is Family.PSI1:
        return LabeledInput(state=psi1(param), true_label=spec.label, param=param, family=spec.family)
    sign = 1 if rng.random() < 0.5 else -1
    return LabeledInput(
        state=psi23(sign, param),
        true_label=spec.label,
        param=param,
        branch_sign=sign,
        family=spec.family,
    )


def classify_outcome(outcome: str, assignment: OutcomeAssignment) -> Label:
    """The label an outcome declares."""
    try:
        return assignment.mapping[outcome]
    except KeyError:
        raise AssignmentError(f"unknown outcome {outcome!r}") from None


def _partition_masks(true_label: Label, assignment: OutcomeAssignment) -> np.ndarray:
    """3 x 4 indicator of (success, error, inconclusive) per outcome."""
    labels = assignment.label_vector()
    masks = np.zeros((3, len(OUTCOME_LABELS)))
    for k, label in enumerate(labels):
        if label is Label.INCONCLUSIVE:
            masks[2, k] = 1.0
        elif label is true_label:
            masks[0, k] = 1.0
        else:
            masks[1, k] = 1.0
    return masks


def partition_table(table: np.ndarray, true_label: Label, assignment: OutcomeAssignment) -> np.ndarray:
    """Per-row (p_suc, p_err, p_inc) for an n x 4 outcome table."""
    return table @ _partition_masks(true_label, assignment).T


def per_input_metrics(
    circuit: DiscriminatorCircuit, labeled: LabeledInput, assignment: OutcomeAssignment
) -> Metrics:
    """Success, error and inconclusive probabilities for one pure input."""
    distribution = outcome_probabilities(circuit, labeled.state)
    totals = {Label.CLASS1: 0.0, Label.CLASS2: 0.0, Label.INCONCLUSIVE: 0.0}
    for outcome, prob in distribution.as_dict().items():
        totals[classify_outcome(outcome, assignment)] += prob
    wrong = Label.CLASS2 if labeled.true_label is Label.CLASS1 else Label.CLASS1
    return Metrics(
        p_suc=totals[labeled.true_label],
        p_err=totals[wrong],
        p_inc=totals[Label.INCONCLUSIVE],
    )


def branch_amplitudes(family: Family, samples: np.ndarray) -> list[np.ndarray]:
    """Input rows per sign branch: one array for psi1, (+, -) for psi23."""
    samples = np.asarray(samples, dtype=float)
    if family is Family.PSI1:
        return [_psi1_rows(samples)]
    return [_psi23_rows(1, samples), _psi23_rows(-1, samples)]


def family_table_from_isometry(isometry: np.ndarray, family: Family, samples: np.ndarray) -> np.ndarray:
    """Exact n x 4 outcome table; sign branches are averaged."""
    tables = [outcome_table_from_isometry(isometry, rows) for rows in branch_amplitudes(family, samples)]
    return np.mean(tables, axis=0)


def family_outcome_table(circuit: DiscriminatorCircuit, member: FamilySamples) -> np.ndarray:
    """Exact outcome probabilities for every sample of a family."""
    return family_table_from_isometry(
        input_isometry(circuit), member.spec.family, np.array(member.samples)
    )


def metrics_from_partitions(ensemble: Ensemble, partitions: list[np.ndarray]) -> Metrics:
    """Prior-weighted, sample-averaged metrics from per-family (n x 3) partitions."""
    check_priors(ensemble)
    total = np.zeros(3)
    for member, partition in zip(ensemble, partitions):
        total += member.spec.prior * partition.mean(axis=0)
    return Metrics(p_suc=float(total[0]), p_err=float(total[1]), p_inc=float(total[2]))


def aggregate_metrics(
    circuit: DiscriminatorCircuit, ensemble: Ensemble, assignment: OutcomeAssignment
) -> Metrics:
    """P_suc, P_err, P_inc of the circuit over a labelled ensemble."""
    if not ensemble:
        raise ArityError("ensemble is empty")
    isometry = input_isometry(circuit)
    partitions = [
        partition_table(
            family_table_from_isometry(isometry, m.spec.family, np.array(m.samples)),
            m.spec.label,
            assignment,
        )
        for m in ensemble
    ]
    return metrics_from_partitions(ensemble, partitions)


def mean_pairwise_fidelity(samples_a: tuple[float, ...], samples_b: tuple[float, ...]) -> float:
    """Mean overlap |<psi1(a)|psi23(b)>| = a*b over all sample pairs."""
    if not samples_a or not samples_b:
        raise ArityError("fidelity needs nonempty sample sets")
    return float(np.mean(samples_a) * np.mean(samples_b))


def unambiguous_success_bound(priors: tuple[float, float], a: float, b: float) -> float:
    """Largest P_suc of any measurement that never errs, for psi1(a) against psi23(b).

    The |01> part of class 2 is orthogonal to psi1 and always identified;
    what remains is psi1 against |10> with overlap a and weights
    (lambda1, lambda2 b^2). Inside the symmetric regime the inconclusive
    rate is 2 sqrt(lambda1 lambda2) a b.
    """
    _check_unit(a, "a")
    _check_unit(b, "b")
    q1, q2 = priors[0], priors[1] * b**2
    if q1 == 0.0 or q2 == 0.0:
        # Nothing left to confuse: the remaining classes are orthogonal.
        return 1.0
    if q1 <= q2 * a**2:
        inconclusive = q1 + q2 * a**2
    elif q2 <= q1 * a**2:
        inconclusive = q2 + q1 * a**2
    else:
        inconclusive = 2.0 * np.sqrt(q1 * q2) * a
    return float(1.0 - inconclusive)


def _density(rows: np.ndarray) -> np.ndarray:
    return np.einsum("ni,nj->ij", rows, rows.conj()) / len(rows)


def helstrom_error_bound(priors: tuple[float, float], a_values: tuple[float, ...], b: float) -> float:
    """Smallest P_err of any two-outcome measurement.

    Class 1 is the equal mixture of psi1(a) over ``a_values``; class 2 is
    the psi23(b) sign mixture.
    """
    if not a_values:
        raise ArityError("helstrom bound needs at least one a value")
    for a in a_values:
        _check_unit(a, "a")
    _check_unit(b, "b")
    rho1 = _density(_psi1_rows(np.asarray(a_values, dtype=float)))
    rho2 = np.mean([_density(rows) for rows in branch_amplitudes(Family.PSI23, np.array([b]))], axis=0)
    gamma = priors[0] * rho1 - priors[1] * rho2
    return float(0.5 * (1.0 - np.abs(np.linalg.eigvalsh(gamma)).sum()))


def metrics_curve(
    isometry: np.ndarray,
    a_values: np.ndarray,
    b: float,
    priors: tuple[float, float],
    assignment: OutcomeAssignment,
) -> np.ndarray:
    """Prior-weighted (p_suc, p_err, p_inc) per a, with class 2 fixed at b.

    Row k is the ensemble {psi1(a_values[k]), psi23(b)} under ``priors``.
    """
    class1 = partition_table(
        family_table_from_isometry(isometry, Family.PSI1, np.asarray(a_values, dtype=float)),
        Label.CLASS1,
        assignment,
    )
    class2 = partition_table(
        family_table_from_isometry(isometry, Family.PSI23, np.array([b])),
        Label.CLASS2,
        assignment,
    )
    return priors[0] * class1 + priors[1] * class2

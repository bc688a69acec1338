"""Input ensembles: state families, parameter distributions, labels, metrics."""

import math
from dataclasses import dataclass, field
from enum import Enum

from povm_discriminator.errors import ArityError, AssignmentError, DomainError, NormalizationError
from povm_discriminator.model.state import StateVector

PARTITION_TOLERANCE = 1e-9

# m_{i2 i1}: i1 is the first ancilla, i2 the second.
OUTCOME_LABELS: tuple[str, ...] = ("m00", "m10", "m01", "m11")


class Family(str, Enum):
    """The two input families."""

    PSI1 = "psi1"
    PSI23 = "psi23"


class Label(str, Enum):
    """What a measurement outcome declares."""

    CLASS1 = "class1"
    CLASS2 = "class2"
    INCONCLUSIVE = "inconclusive"


FAMILY_LABEL: dict[Family, Label] = {
    Family.PSI1: Label.CLASS1,
    Family.PSI23: Label.CLASS2,
}


def _check_interval(lo: float, hi: float, what: str) -> None:
    if not 0.0 <= lo <= hi <= 1.0:
        raise DomainError(f"{what} support [{lo}, {hi}] must lie inside [0, 1]")


@dataclass(frozen=True)
class Fixed:
    """A point mass."""

    value: float

    def __post_init__(self) -> None:
        _check_interval(self.value, self.value, "fixed value")


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal(mu, sigma) restricted to [lo, hi]; sigma is a standard deviation."""

    mu: float
    sigma: float
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self) -> None:
        _check_interval(self.lo, self.hi, "truncated normal")
        if self.sigma <= 0.0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class Uniform:
    """Uniform on [lo, hi]."""

    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self) -> None:
        _check_interval(self.lo, self.hi, "uniform")


@dataclass(frozen=True)
class Mixture:
    """Weighted mixture of distributions; weights are normalized on use."""

    components: tuple[tuple[float, "Distribution"], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ArityError("a mixture needs at least one component")
        weights = [w for w, _ in self.components]
        if any(w < 0 for w in weights) or sum(weights) <= 0:
            raise DomainError(f"mixture weights must be nonnegative with positive sum: {weights}")

    @property
    def weights(self) -> tuple[float, ...]:
        total = sum(w for w, _ in self.components)
        return tuple(w / total for w, _ in self.components)


Distribution = Fixed | TruncatedNormal | Uniform | Mixture


@dataclass(frozen=True)
class StateFamilySpec:
    """A parametrized family with its prior weight and parameter law."""

    family: Family
    prior: float
    distribution: Distribution

    def __post_init__(self) -> None:
        if not 0.0 <= self.prior <= 1.0:
            raise DomainError(f"prior must lie in [0, 1], got {self.prior}")

    @property
    def label(self) -> Label:
        return FAMILY_LABEL[self.family]


@dataclass(frozen=True)
class FamilySamples:
    """A family together with its sample set S_i of parameters."""

    spec: StateFamilySpec
    samples: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(float(s) for s in self.samples))
        if not self.samples:
            raise ArityError(f"empty sample set for family {self.spec.family.value}")
        for s in self.samples:
            if not 0.0 <= s <= 1.0:
                raise DomainError(f"sample {s} outside [0, 1]")


Ensemble = list[FamilySamples]


def check_priors(ensemble: Ensemble) -> None:
    """Priors across an ensemble must sum to one."""
    total = sum(member.spec.prior for member in ensemble)
    if not math.isclose(total, 1.0, abs_tol=PARTITION_TOLERANCE):
        raise NormalizationError(f"priors sum to {total}, expected 1")


@dataclass(frozen=True)
class OutcomeAssignment:
    """Total map from the four outcomes to labels."""

    mapping: dict[str, Label] = field(
        default_factory=lambda: {
            "m00": Label.CLASS1,
            "m10": Label.CLASS1,
            "m01": Label.CLASS2,
            "m11": Label.INCONCLUSIVE,
        }
    )

    def __post_init__(self) -> None:
        mapping = {str(k): Label(v) for k, v in self.mapping.items()}
        object.__setattr__(self, "mapping", mapping)
        unknown = set(mapping) - set(OUTCOME_LABELS)
        missing = set(OUTCOME_LABELS) - set(mapping)
        if unknown or missing:
            raise AssignmentError(
                f"assignment must cover exactly {OUTCOME_LABELS}; "
                f"missing {sorted(missing)}, unknown {sorted(unknown)}"
            )
        for label in (Label.CLASS1, Label.CLASS2):
            if label not in mapping.values():
                raise AssignmentError(f"no outcome assigned to {label.value}")

    def __hash__(self) -> int:
        return hash(tuple(sorted((k, v.value) for k, v in self.mapping.items())))

    def label_vector(self) -> tuple[Label, ...]:
        """Labels aligned with OUTCOME_LABELS."""
        return tuple(self.mapping[o] for o in OUTCOME_LABELS)


@dataclass(frozen=True, eq=False)
class LabeledInput:
    """A pure input state with its ground-truth class."""

    state: StateVector
    true_label: Label
    param: float
    branch_sign: int = 1
    family: Family = Family.PSI1


@dataclass(frozen=True)
class Metrics:
    """Success, error and inconclusive probabilities."""

    p_suc: float
    p_err: float
    p_inc: float

    def __post_init__(self) -> None:
        total = self.p_suc + self.p_err + self.p_inc
        if abs(total - 1.0) > PARTITION_TOLERANCE:
            raise NormalizationError(f"metrics sum to {total!r}, expected 1")

    def as_dict(self) -> dict[str, float]:
        return {"p_suc": self.p_suc, "p_err": self.p_err, "p_inc": self.p_inc}

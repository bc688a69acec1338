"""Training configuration, optimizer state and results."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from povm_discriminator.errors import ArityError, DomainError, ShapeError
from povm_discriminator.model.ensemble import Ensemble, Metrics, OutcomeAssignment


@dataclass(frozen=True)
class CostConfig:
    """Penalty weights of the discrimination cost."""

    alpha_err: float = 0.0
    alpha_inc: float = 0.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.alpha_err < 0 or self.alpha_inc < 0:
            raise DomainError(
                f"penalties must be nonnegative: ({self.alpha_err}, {self.alpha_inc})"
            )
        if self.scale <= 0:
            raise DomainError(f"scale must be positive, got {self.scale}")


class OptimizerKind(str, Enum):
    SGD = "sgd"
    ADAM = "adam"
    RMSPROP = "rmsprop"


@dataclass(frozen=True)
class OptimizerSettings:
    """Hyperparameters shared by the optimizers (unused ones are ignored)."""

    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    rms_decay: float = 0.9

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise DomainError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("beta1", "beta2", "rms_decay"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise DomainError(f"{name} must lie in [0, 1), got {value}")
        if self.epsilon <= 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True, eq=False)
class OptimizerState:
    """Optimizer kind, iteration count and moment accumulators."""

    kind: OptimizerKind
    t: int
    m: np.ndarray
    v: np.ndarray
    settings: OptimizerSettings = field(default_factory=OptimizerSettings)

    def __post_init__(self) -> None:
        m = np.array(self.m, dtype=float)
        v = np.array(self.v, dtype=float)
        if m.shape != v.shape:
            raise ShapeError(f"moment shapes differ: {m.shape} vs {v.shape}")
        if np.any(v < 0):
            raise DomainError("second moments must be nonnegative")
        if self.t < 0:
            raise DomainError(f"iteration count must be nonnegative, got {self.t}")
        m.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "kind", OptimizerKind(self.kind))


@dataclass(frozen=True)
class EvaluationMode:
    """Exact probabilities (shots is None) or finite-shot estimates."""

    shots: int | None = None

    def __post_init__(self) -> None:
        if self.shots is not None and self.shots < 1:
            raise DomainError(f"shots must be at least 1, got {self.shots}")

    @property
    def sampled(self) -> bool:
        return self.shots is not None

    @property
    def name(self) -> str:
        return "sampled" if self.sampled else "exact"


EXACT = EvaluationMode()


@dataclass(frozen=True)
class TrainConfig:
    """Everything one training run needs."""

    ensemble: Ensemble
    cost: CostConfig = field(default_factory=CostConfig)
    minibatch_size: int = 50
    gradient_step: float = 1e-3
    max_iterations: int = 5000
    seed: int = 0
    mode: EvaluationMode = EXACT
    optimizer: OptimizerKind = OptimizerKind.ADAM
    settings: OptimizerSettings = field(default_factory=OptimizerSettings)
    assignment: OutcomeAssignment = field(default_factory=OutcomeAssignment)
    test_ensemble: Ensemble | None = None
    log_every: int = 500

    def __post_init__(self) -> None:
        if not self.ensemble:
            raise ArityError("training ensemble is empty")
        if self.gradient_step <= 0:
            raise DomainError(f"gradient_step must be positive, got {self.gradient_step}")
        if self.max_iterations < 0:
            raise DomainError(f"max_iterations must be nonnegative, got {self.max_iterations}")
        largest = max(len(member.samples) for member in self.ensemble)
        if not 1 <= self.minibatch_size <= largest:
            raise ArityError(
                f"minibatch_size {self.minibatch_size} must lie in [1, {largest}]"
            )


@dataclass(frozen=True)
class TrajectoryPoint:
    """Cost and training-set metrics after one optimizer step."""

    iteration: int
    j1_estimated: float
    j1_exact: float
    p_suc: float
    p_err: float
    p_inc: float


@dataclass(frozen=True, eq=False)
class TrainResult:
    """Outcome of one training run."""

    params: np.ndarray
    trajectory: tuple[TrajectoryPoint, ...]
    train_metrics: Metrics
    test_metrics: Metrics | None
    wall_time: float
    seed: int
    final_j1_exact: float
    final_j1_estimated: float

    @property
    def iterations(self) -> int:
        return len(self.trajectory)

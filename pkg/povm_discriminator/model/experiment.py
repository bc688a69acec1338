"""Experiment definitions, run summaries and reports."""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

from povm_discriminator.errors import ArityError, DomainError
from povm_discriminator.model.ensemble import (
    Distribution,
    Ensemble,
    Metrics,
    OutcomeAssignment,
)
from povm_discriminator.model.training import (
    EXACT,
    CostConfig,
    EvaluationMode,
    OptimizerKind,
    OptimizerSettings,
    TrainConfig,
    TrainResult,
    TrajectoryPoint,
)

DEFAULT_B = 1.0 / math.sqrt(2.0)
DEFAULT_PRIORS = (1.0 / 3.0, 2.0 / 3.0)


class ExperimentKind(str, Enum):
    CENTERED_A0 = "centered_a0"
    FULL_RANGE = "full_range"
    GENERALIZATION = "generalization"
    DISTRIBUTION_CLASSIFICATION = "distribution_classification"
    PENALTY_SWEEP = "penalty_sweep"
    SHOT_CONVERGENCE = "shot_convergence"
    OPTIMIZER_COMPARISON = "optimizer_comparison"


@dataclass(frozen=True)
class TrainTemplate:
    """Training settings shared by every run of an experiment cell."""

    cost: CostConfig = field(default_factory=CostConfig)
    optimizer: OptimizerKind = OptimizerKind.ADAM
    settings: OptimizerSettings = field(default_factory=OptimizerSettings)
    minibatch_size: int = 50
    gradient_step: float = 1e-3
    max_iterations: int = 5000
    mode: EvaluationMode = EXACT
    assignment: OutcomeAssignment = field(default_factory=OutcomeAssignment)
    log_every: int = 500

    def configure(self, ensemble: Ensemble, test_ensemble: Ensemble | None, seed: int) -> TrainConfig:
        return TrainConfig(
            ensemble=ensemble,
            cost=self.cost,
            minibatch_size=self.minibatch_size,
            gradient_step=self.gradient_step,
            max_iterations=self.max_iterations,
            seed=seed,
            mode=self.mode,
            optimizer=self.optimizer,
            settings=self.settings,
            assignment=self.assignment,
            test_ensemble=test_ensemble,
            log_every=self.log_every,
        )

    def with_penalties(self, alpha_err: float, alpha_inc: float) -> "TrainTemplate":
        return replace(self, cost=replace(self.cost, alpha_err=alpha_err, alpha_inc=alpha_inc))


def _check_priors(priors: tuple[float, float]) -> None:
    if len(priors) != 2 or not math.isclose(sum(priors), 1.0, abs_tol=1e-9):
        raise DomainError(f"two priors summing to 1 are required, got {priors}")


def _check_size(value: int, name: str) -> None:
    if value < 1:
        raise ArityError(f"{name} must be at least 1, got {value}")


@dataclass(frozen=True)
class CenteredTask:
    """psi1 parameters normal around a0; tested on a0 itself."""

    a0: float = 0.25
    sigma: float = 0.01
    train_size: int = 100
    b: float = DEFAULT_B
    priors: tuple[float, float] = DEFAULT_PRIORS

    def __post_init__(self) -> None:
        _check_priors(self.priors)
        _check_size(self.train_size, "train_size")


@dataclass(frozen=True)
class RangeTask:
    """Evenly spaced training a in [train_lo, train_hi]; i.i.d. test a in [test_lo, test_hi]."""

    train_lo: float = 0.0
    train_hi: float = 1.0
    train_size: int = 100
    test_lo: float = 0.0
    test_hi: float = 1.0
    test_size: int = 150
    b: float = DEFAULT_B
    priors: tuple[float, float] = DEFAULT_PRIORS

    def __post_init__(self) -> None:
        _check_priors(self.priors)
        _check_size(self.train_size, "train_size")
        _check_size(self.test_size, "test_size")


@dataclass(frozen=True)
class DistributionTask:
    """Both families drawn from arbitrary parameter laws, i.i.d. for train and test."""

    a_distribution: Distribution
    b_distribution: Distribution
    train_size: int = 100
    test_size: int = 150
    priors: tuple[float, float] = DEFAULT_PRIORS

    def __post_init__(self) -> None:
        _check_priors(self.priors)
        _check_size(self.train_size, "train_size")
        _check_size(self.test_size, "test_size")


Task = CenteredTask | RangeTask | DistributionTask


@dataclass(frozen=True)
class ExperimentSpec:
    """A declarative experiment: base task and training template plus kind-specific grids."""

    name: str
    kind: ExperimentKind
    task: Task
    train: TrainTemplate = field(default_factory=TrainTemplate)
    seed: int = 0
    repetitions: int = 1
    output: str | None = None
    penalties: tuple[tuple[float, float], ...] = ()
    restricted_range: tuple[float, float] = (0.9, 1.0)
    a_distributions: tuple[tuple[str, Distribution], ...] = ()
    b_distributions: tuple[tuple[str, Distribution], ...] = ()
    shots: tuple[int, ...] = ()
    gradient_steps: tuple[float, ...] = ()
    learning_rates: tuple[float, ...] = ()
    optimizers: tuple[OptimizerKind, ...] = ()
    moving_average_window: int = 500
    record_trajectories: bool = False

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ArityError(f"repetitions must be at least 1, got {self.repetitions}")


@dataclass(frozen=True)
class RunSummary:
    """What a report keeps of one training run."""

    run_index: int
    seed: int
    final_j1_estimated: float
    final_j1_exact: float
    train_metrics: Metrics
    test_metrics: Metrics | None
    wall_time: float
    input_fidelity: float = 0.0
    trajectory: tuple[TrajectoryPoint, ...] = ()
    # (p_suc, p_err, p_inc) on an evenly spaced a grid over the test range.
    a_curve: tuple[tuple[float, float, float], ...] = ()

    @classmethod
    def from_result(
        cls, run_index: int, result: TrainResult, input_fidelity: float = 0.0
    ) -> "RunSummary":
        return cls(
            run_index=run_index,
            seed=result.seed,
            final_j1_estimated=result.final_j1_estimated,
            final_j1_exact=result.final_j1_exact,
            train_metrics=result.train_metrics,
            test_metrics=result.test_metrics,
            wall_time=result.wall_time,
            input_fidelity=input_fidelity,
            trajectory=result.trajectory,
        )


@dataclass(frozen=True)
class AggregateStats:
    """Means and standard deviations over the runs of a cell."""

    count: int
    mean: dict[str, float]
    sd: dict[str, float]


@dataclass(frozen=True)
class CellReport:
    """One point of an experiment grid; ``error`` is set when it failed."""

    name: str
    settings: dict[str, Any]
    runs: tuple[RunSummary, ...] = ()
    aggregate: AggregateStats | None = None
    extras: dict[str, float] = field(default_factory=dict)
    curves: dict[str, tuple[float, ...]] = field(default_factory=dict)
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class ExperimentReport:
    """All cells of an experiment with per-run summaries and aggregates."""

    name: str
    kind: ExperimentKind
    seed: int
    repetitions: int
    config: dict[str, Any]
    cells: tuple[CellReport, ...]
    extras: dict[str, float] = field(default_factory=dict)

    def cell(self, name: str) -> CellReport:
        for cell in self.cells:
            if cell.name == name:
                return cell
        raise KeyError(name)

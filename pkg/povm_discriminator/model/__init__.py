"""Domain model for POVM discrimination."""

from povm_discriminator.model.ensemble import (
    OUTCOME_LABELS,
    Family,
    FamilySamples,
    Fixed,
    LabeledInput,
    Label,
    Metrics,
    Mixture,
    OutcomeAssignment,
    StateFamilySpec,
    TruncatedNormal,
    Uniform,
)
from povm_discriminator.model.experiment import (
    AggregateStats,
    CellReport,
    CenteredTask,
    DistributionTask,
    ExperimentKind,
    ExperimentReport,
    ExperimentSpec,
    RangeTask,
    RunSummary,
    TrainTemplate,
)
from povm_discriminator.model.gates import (
    CNOTGate,
    SingleQubitGate,
    UniformlyControlledRy,
    UniformlyControlledRz,
)
from povm_discriminator.model.state import OutcomeDistribution, StateVector
from povm_discriminator.model.training import (
    CostConfig,
    EvaluationMode,
    OptimizerKind,
    OptimizerSettings,
    OptimizerState,
    TrainConfig,
    TrainResult,
    TrajectoryPoint,
)

__all__ = [
    "AggregateStats",
    "CNOTGate",
    "CellReport",
    "CenteredTask",
    "CostConfig",
    "DistributionTask",
    "EvaluationMode",
    "ExperimentKind",
    "ExperimentReport",
    "ExperimentSpec",
    "Family",
    "FamilySamples",
    "Fixed",
    "LabeledInput",
    "Label",
    "Metrics",
    "Mixture",
    "OUTCOME_LABELS",
    "OptimizerKind",
    "OptimizerSettings",
    "OptimizerState",
    "OutcomeAssignment",
    "OutcomeDistribution",
    "RangeTask",
    "RunSummary",
    "SingleQubitGate",
    "StateFamilySpec",
    "StateVector",
    "TrainConfig",
    "TrainResult",
    "TrainTemplate",
    "TrajectoryPoint",
    "TruncatedNormal",
    "Uniform",
    "UniformlyControlledRy",
    "UniformlyControlledRz",
]

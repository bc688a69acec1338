"""Declarative experiments: configs, tasks and the repeated-run orchestrator."""

from povm_discriminator.experiments.config import (
    apply_overrides,
    echo_spec,
    load_experiment_spec,
    parse_experiment_spec,
)
from povm_discriminator.experiments.runner import (
    aggregate_runs,
    plan_cells,
    run_experiment,
    sweep_penalties,
)
from povm_discriminator.experiments.tasks import build_ensembles

__all__ = [
    "aggregate_runs",
    "apply_overrides",
    "build_ensembles",
    "echo_spec",
    "load_experiment_spec",
    "parse_experiment_spec",
    "plan_cells",
    "run_experiment",
    "sweep_penalties",
]

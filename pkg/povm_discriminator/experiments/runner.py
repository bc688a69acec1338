"""Orchestration of seeded, repeated training runs over experiment grids."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Sequence

import numpy as np
from scipy.stats import spearmanr

from povm_discriminator.circuit import isometry_stack
from povm_discriminator.discrimination import (
    evenly_spaced,
    helstrom_error_bound,
    mean_pairwise_fidelity,
    metrics_curve,
    unambiguous_success_bound,
)
from povm_discriminator.errors import ArityError, ConfigError
from povm_discriminator.experiments.config import echo_spec
from povm_discriminator.experiments.tasks import build_ensembles
from povm_discriminator.model.ensemble import Ensemble, Family
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
    Task,
    TrainTemplate,
)
from povm_discriminator.model.training import EXACT, EvaluationMode, TrainResult
from povm_discriminator.training.loop import train
from povm_discriminator.utils import derive_seed, mean_and_sd, moving_average

logger = logging.getLogger(__name__)

# A run whose final cost exceeds this multiple of the Adam mean counts as plateaued.
PLATEAU_FACTOR = 1.5

# Stream index of the data-drawing generator within a run seed.
DATA_STREAM = 1

# Points of the per-a metric curves of range tasks.
CURVE_POINTS = 51


@dataclass(frozen=True)
class CellPlan:
    """One grid point: a task and training template under a name."""

    name: str
    task: Task
    train: TrainTemplate

    @property
    def settings(self) -> dict[str, Any]:
        return {
            "alpha_err": self.train.cost.alpha_err,
            "alpha_inc": self.train.cost.alpha_inc,
            "optimizer": self.train.optimizer.value,
            "shots": self.train.mode.shots,
            "gradient_step": self.train.gradient_step,
            "learning_rate": self.train.settings.learning_rate,
        }


@dataclass(frozen=True)
class RunJob:
    run_index: int
    seed: int
    task: Task
    train: TrainTemplate


def train_run(task: Task, template: TrainTemplate, seed: int) -> tuple[TrainResult, Ensemble, Ensemble]:
    """Draw a run's data from its seed, then train on it."""
    data_rng = np.random.default_rng(derive_seed(seed, DATA_STREAM))
    train_set, test_set = build_ensembles(task, data_rng)
    return train(template.configure(train_set, test_set, seed)), train_set, test_set


def _execute(job: RunJob) -> tuple[RunSummary | None, str | None]:
    """Train one seeded run; failures come back as text so they cross process boundaries."""
    try:
        result, _, test_set = train_run(job.task, job.train, job.seed)
        fidelity = mean_pairwise_fidelity(
            _samples(test_set, Family.PSI1), _samples(test_set, Family.PSI23)
        )
        summary = RunSummary.from_result(job.run_index, result, fidelity)
        if isinstance(job.task, RangeTask):
            summary = replace(summary, a_curve=_a_curve(job.task, job.train, result.params))
        return summary, None
    except Exception as e:
        logger.debug("Run %d failed", job.run_index, exc_info=True)
        return None, f"{type(e).__name__}: {e}"


def curve_grid(task: RangeTask) -> tuple[float, ...]:
    return evenly_spaced(task.test_lo, task.test_hi, CURVE_POINTS)


def _a_curve(
    task: RangeTask, template: TrainTemplate, params: np.ndarray
) -> tuple[tuple[float, float, float], ...]:
    table = metrics_curve(
        isometry_stack(params)[0],
        np.array(curve_grid(task)),
        task.b,
        task.priors,
        template.assignment,
    )
    return tuple(tuple(float(v) for v in row) for row in table)


def _samples(ensemble: Ensemble, family: Family) -> tuple[float, ...]:
    return tuple(s for m in ensemble if m.spec.family is family for s in m.samples)


def _map(jobs: list[RunJob], max_workers: int) -> list[tuple[RunSummary | None, str | None]]:
    if max_workers <= 1 or len(jobs) <= 1:
        return [_execute(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(_execute, jobs))


def run_seeds(seed: int, repetitions: int) -> list[int]:
    """Per-run seeds derived from the top-level seed; shared by every cell."""
    return [derive_seed(seed, index) for index in range(repetitions)]


_STAT_KEYS = ("final_j1_estimated", "final_j1_exact")


def aggregate_runs(runs: Sequence[RunSummary]) -> AggregateStats:
    """Mean and sample standard deviation of costs and metrics over runs."""
    columns: dict[str, list[float]] = {key: [] for key in _STAT_KEYS}
    for run in runs:
        for key in _STAT_KEYS:
            columns[key].append(getattr(run, key))
        for prefix, metrics in (("train", run.train_metrics), ("test", run.test_metrics)):
            if metrics is None:
                continue
            for name, value in metrics.as_dict().items():
                columns.setdefault(f"{prefix}_{name}", []).append(value)
    mean, sd = {}, {}
    for key, values in columns.items():
        mean[key], sd[key] = mean_and_sd(values)
    return AggregateStats(count=len(runs), mean=mean, sd=sd)


def _mean_a_curve(task: Task, runs: Sequence[RunSummary]) -> dict[str, tuple[float, ...]]:
    """Run-averaged per-a metrics, keyed a, p_suc, p_err, p_inc."""
    if not isinstance(task, RangeTask) or not runs or any(not r.a_curve for r in runs):
        return {}
    mean = np.mean([r.a_curve for r in runs], axis=0)
    curves = {"a": curve_grid(task)}
    for k, name in enumerate(("p_suc", "p_err", "p_inc")):
        curves[name] = tuple(mean[:, k].tolist())
    return curves


def _assemble(
    plans: list[CellPlan],
    outcomes: list[tuple[RunSummary | None, str | None]],
    repetitions: int,
) -> list[CellReport]:
    cells = []
    for k, plan in enumerate(plans):
        chunk = outcomes[k * repetitions:(k + 1) * repetitions]
        errors = [f"run {i}: {error}" for i, (_, error) in enumerate(chunk) if error]
        if errors:
            logger.warning("Cell %s failed: %s", plan.name, errors[0])
            cells.append(CellReport(name=plan.name, settings=plan.settings, error="; ".join(errors)))
            continue
        runs = tuple(summary for summary, _ in chunk)
        cell = CellReport(
            name=plan.name,
            settings=plan.settings,
            runs=runs,
            aggregate=aggregate_runs(runs),
            curves=_mean_a_curve(plan.task, runs),
        )
        logger.info(
            "Cell %s: test P_suc %.4f, P_err %.4f, P_inc %.4f over %d run(s)",
            plan.name,
            cell.aggregate.mean.get("test_p_suc", float("nan")),
            cell.aggregate.mean.get("test_p_err", float("nan")),
            cell.aggregate.mean.get("test_p_inc", float("nan")),
            len(runs),
        )
        cells.append(cell)
    return cells


def run_cells(
    plans: list[CellPlan], seed: int, repetitions: int, jobs: int = 1
) -> list[CellReport]:
    """R seeded runs per cell, executed in parallel when ``jobs`` > 1."""
    if not plans:
        raise ArityError("nothing to run: the experiment grid is empty")
    seeds = run_seeds(seed, repetitions)
    work = [
        RunJob(run_index=i, seed=s, task=plan.task, train=plan.train)
        for plan in plans
        for i, s in enumerate(seeds)
    ]
    return _assemble(plans, _map(work, jobs), repetitions)


def _penalty_plans(
    grid: Sequence[tuple[float, float]], base: TrainTemplate, task: Task
) -> list[CellPlan]:
    if not grid:
        raise ArityError("penalty grid is empty")
    return [
        CellPlan(f"alpha_err={e:g},alpha_inc={i:g}", task, base.with_penalties(e, i))
        for e, i in grid
    ]


def sweep_penalties(
    grid: Sequence[tuple[float, float]],
    base: TrainTemplate,
    task: Task,
    repetitions: int,
    seed: int = 0,
    jobs: int = 1,
) -> list[CellReport]:
    """One cell per (alpha_err, alpha_inc), rows in grid order.

    A failing cell carries its error; the remaining cells still run.
    """
    return run_cells(_penalty_plans(grid, base, task), seed, repetitions, jobs)


def _require_range(spec: ExperimentSpec) -> RangeTask:
    if not isinstance(spec.task, RangeTask):
        raise ConfigError([f"experiment: {spec.kind.value} needs a range task"])
    return spec.task


def plan_cells(spec: ExperimentSpec) -> list[CellPlan]:
    """Expand an experiment into its grid of cells."""
    kind = spec.kind
    if kind in (ExperimentKind.CENTERED_A0, ExperimentKind.FULL_RANGE):
        return [CellPlan(kind.value, spec.task, spec.train)]

    if kind is ExperimentKind.GENERALIZATION:
        task = _require_range(spec)
        lo, hi = spec.restricted_range
        return [
            CellPlan("restricted", replace(task, train_lo=lo, train_hi=hi), spec.train),
            CellPlan("full", replace(task, train_lo=0.0, train_hi=1.0), spec.train),
        ]

    if kind is ExperimentKind.DISTRIBUTION_CLASSIFICATION:
        sizes = spec.task
        plans = []
        for a_name, a_law in spec.a_distributions:
            for b_name, b_law in spec.b_distributions:
                task = DistributionTask(
                    a_distribution=a_law,
                    b_distribution=b_law,
                    train_size=sizes.train_size,
                    test_size=sizes.test_size,
                    priors=sizes.priors,
                )
                plans.append(CellPlan(f"{a_name}/{b_name}", task, spec.train))
        return plans

    if kind is ExperimentKind.PENALTY_SWEEP:
        return _penalty_plans(spec.penalties, spec.train, spec.task)

    if kind is ExperimentKind.SHOT_CONVERGENCE:
        plans = [CellPlan("exact", spec.task, replace(spec.train, mode=EXACT))]
        steps = spec.gradient_steps or (spec.train.gradient_step,)
        rates = spec.learning_rates or (spec.train.settings.learning_rate,)
        for shots in spec.shots:
            for step in steps:
                for rate in rates:
                    template = replace(
                        spec.train,
                        mode=EvaluationMode(shots=shots),
                        gradient_step=step,
                        settings=replace(spec.train.settings, learning_rate=rate),
                    )
                    plans.append(CellPlan(f"shots={shots},step={step:g},lr={rate:g}", spec.task, template))
        return plans

    if kind is ExperimentKind.OPTIMIZER_COMPARISON:
        return [
            CellPlan(optimizer.value, spec.task, replace(spec.train, optimizer=optimizer))
            for optimizer in spec.optimizers
        ]

    raise ConfigError([f"kind: unsupported experiment kind {kind!r}"])


def _trajectory_costs(run: RunSummary) -> list[float]:
    return [point.j1_estimated for point in run.trajectory]


def _add_cell_extras(cell: CellReport, extras: dict[str, float]) -> CellReport:
    return replace(cell, extras={**cell.extras, **extras})


def _finish_generalization(cells: list[CellReport]) -> tuple[list[CellReport], dict[str, float]]:
    ok = {c.name: c for c in cells if not c.failed}
    if "restricted" in ok and "full" in ok:
        gap = abs(ok["restricted"].aggregate.mean["test_p_suc"] - ok["full"].aggregate.mean["test_p_suc"])
        return cells, {"p_suc_gap": gap}
    return cells, {}


def _finish_distributions(cells: list[CellReport]) -> tuple[list[CellReport], dict[str, float]]:
    cells = [
        cell if cell.failed else _add_cell_extras(
            cell, {"mean_fidelity": float(np.mean([r.input_fidelity for r in cell.runs]))}
        )
        for cell in cells
    ]
    ok = [c for c in cells if not c.failed]
    extras: dict[str, float] = {}
    if ok:
        extras["max_p_err"] = max(c.aggregate.mean["test_p_err"] for c in ok)
    if len(ok) >= 2:
        rho = spearmanr(
            [c.aggregate.mean["test_p_suc"] for c in ok],
            [c.extras["mean_fidelity"] for c in ok],
        ).statistic
        extras["spearman_rho"] = float(rho)
    return cells, extras


def _finish_shots(cells: list[CellReport], window: int) -> tuple[list[CellReport], dict[str, float]]:
    reference = next((c for c in cells if c.name == "exact" and not c.failed), None)
    exact_j1 = reference.aggregate.mean["final_j1_exact"] if reference else None
    finished = []
    for cell in cells:
        if cell.failed:
            finished.append(cell)
            continue
        final = [r.final_j1_estimated for r in cell.runs]
        mean, sd = mean_and_sd(final)
        extras = {
            "final_moving_average": float(
                np.mean([moving_average(_trajectory_costs(r), window) for r in cell.runs])
            ),
            "relative_sd": sd / mean if mean else float("nan"),
        }
        if exact_j1:
            extras["relative_error"] = abs(mean - exact_j1) / exact_j1
        finished.append(_add_cell_extras(cell, extras))
    return finished, {}


def _curves(cell: CellReport) -> dict[str, tuple[float, ...]]:
    lengths = {len(r.trajectory) for r in cell.runs}
    if len(lengths) != 1 or 0 in lengths:
        return {}
    costs = np.array([_trajectory_costs(r) for r in cell.runs])
    sd = costs.std(axis=0, ddof=1) if costs.shape[0] > 1 else np.zeros(costs.shape[1])
    return {"j1_mean": tuple(costs.mean(axis=0).tolist()), "j1_sd": tuple(sd.tolist())}


def _finish_optimizers(cells: list[CellReport]) -> tuple[list[CellReport], dict[str, float]]:
    adam = next((c for c in cells if c.name == "adam" and not c.failed), None)
    adam_mean = adam.aggregate.mean["final_j1_exact"] if adam else None
    finished = []
    for cell in cells:
        if cell.failed:
            finished.append(cell)
            continue
        extras = {}
        if adam_mean is not None:
            extras["plateaued_runs"] = float(
                sum(r.final_j1_exact > PLATEAU_FACTOR * adam_mean for r in cell.runs)
            )
        curves = {**cell.curves, **_curves(cell)}
        finished.append(replace(cell, extras={**cell.extras, **extras}, curves=curves))
    return finished, {}


def optimum_references(task: Task) -> dict[str, float]:
    """Best achievable P_suc without errors and least P_err without abstaining, at a0."""
    if not isinstance(task, CenteredTask):
        return {}
    return {
        "unambiguous_p_suc_bound": unambiguous_success_bound(task.priors, task.a0, task.b),
        "helstrom_p_err_bound": helstrom_error_bound(task.priors, (task.a0,), task.b),
    }


def _strip_trajectories(cells: list[CellReport]) -> list[CellReport]:
    return [
        replace(cell, runs=tuple(replace(run, trajectory=()) for run in cell.runs))
        for cell in cells
    ]


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> ExperimentReport:
    """Run every cell of ``spec`` ``spec.repetitions`` times and aggregate."""
    plans = plan_cells(spec)
    logger.info(
        "Experiment %s (%s): %d cell(s) x %d run(s), seed %d",
        spec.name,
        spec.kind.value,
        len(plans),
        spec.repetitions,
        spec.seed,
    )
    cells = run_cells(plans, spec.seed, spec.repetitions, jobs)

    extras: dict[str, float] = {}
    if spec.kind is ExperimentKind.GENERALIZATION:
        cells, extras = _finish_generalization(cells)
    elif spec.kind is ExperimentKind.DISTRIBUTION_CLASSIFICATION:
        cells, extras = _finish_distributions(cells)
    elif spec.kind is ExperimentKind.SHOT_CONVERGENCE:
        cells, extras = _finish_shots(cells, spec.moving_average_window)
    elif spec.kind is ExperimentKind.OPTIMIZER_COMPARISON:
        cells, extras = _finish_optimizers(cells)
    if spec.kind in (ExperimentKind.CENTERED_A0, ExperimentKind.PENALTY_SWEEP):
        extras.update(optimum_references(spec.task))

    if not spec.record_trajectories:
        cells = _strip_trajectories(cells)

    return ExperimentReport(
        name=spec.name,
        kind=spec.kind,
        seed=spec.seed,
        repetitions=spec.repetitions,
        config=echo_spec(spec),
        cells=tuple(cells),
        extras=extras,
    )

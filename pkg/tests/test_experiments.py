"""Tests for povm_discriminator.experiments module."""

import math
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from povm_discriminator.discrimination import evenly_spaced
from povm_discriminator.errors import ArityError, ConfigError, NumericError
from povm_discriminator.experiments import (
    aggregate_runs,
    apply_overrides,
    build_ensembles,
    echo_spec,
    load_experiment_spec,
    parse_experiment_spec,
    plan_cells,
    run_experiment,
    sweep_penalties,
)
from povm_discriminator.experiments.runner import CURVE_POINTS, run_seeds
from povm_discriminator.model.ensemble import Family, Metrics, TruncatedNormal
from povm_discriminator.model.experiment import (
    DEFAULT_B,
    CenteredTask,
    DistributionTask,
    ExperimentKind,
    RangeTask,
    RunSummary,
    TrainTemplate,
)
from povm_discriminator.model.training import CostConfig, OptimizerKind

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _config(kind: str, experiment: dict | None = None, **train) -> dict:
    """A tiny but complete config document."""
    return {
        "name": f"tiny_{kind}",
        "kind": kind,
        "seed": 5,
        "repetitions": 2,
        "train": {
            "cost": {"alpha_err": 20, "alpha_inc": 2},
            "minibatch_size": 2,
            "max_iterations": 2,
            **train,
        },
        "experiment": {"train_size": 4, "test_size": 3, **(experiment or {})},
    }


class TestParseExperimentSpec:
    """Tests for config validation."""

    def test_minimal_config(self):
        spec = parse_experiment_spec({"kind": "full_range"})
        assert spec.name == "full_range"
        assert spec.kind is ExperimentKind.FULL_RANGE
        assert spec.task == RangeTask()
        assert spec.train == TrainTemplate()
        assert spec.repetitions == 1

    def test_all_problems_reported_with_paths(self):
        data = _config("full_range")
        data["seed"] = -1
        data["colour"] = "red"
        data["train"]["cost"]["alpha_err"] = "high"
        data["train"]["optimizer"] = {"kind": "lbfgs"}
        with pytest.raises(ConfigError) as info:
            parse_experiment_spec(data)
        problems = info.value.problems
        assert "seed: must be nonnegative" in problems
        assert "colour: unknown field" in problems
        assert "train.cost.alpha_err: expected a number" in problems
        assert any(p.startswith("train.optimizer.kind:") for p in problems)

    def test_missing_kind(self):
        with pytest.raises(ConfigError) as info:
            parse_experiment_spec({"seed": 1})
        assert info.value.problems == ["kind: required"]

    def test_unknown_kind(self):
        with pytest.raises(ConfigError) as info:
            parse_experiment_spec({"kind": "tomography"})
        assert info.value.problems[0].startswith("kind:")

    def test_root_must_be_mapping(self):
        with pytest.raises(ConfigError):
            parse_experiment_spec(["full_range"])

    def test_unknown_experiment_field(self):
        with pytest.raises(ConfigError) as info:
            parse_experiment_spec(_config("full_range", {"a0": 0.3}))
        assert "experiment.a0: unknown field" in info.value.problems

    @pytest.mark.parametrize(
        "kind,key",
        [
            ("penalty_sweep", "penalties"),
            ("shot_convergence", "shots"),
            ("distribution_classification", "a_distributions"),
        ],
    )
    def test_required_grids(self, kind, key):
        with pytest.raises(ConfigError) as info:
            parse_experiment_spec(_config(kind))
        assert f"experiment.{key}: required for {kind}" in info.value.problems

    def test_minibatch_larger_than_training_set(self):
        with pytest.raises(ConfigError) as info:
            parse_experiment_spec(_config("full_range", minibatch_size=10))
        assert "train.minibatch_size: exceeds experiment.train_size (4)" in info.value.problems

    def test_bad_penalty_pair(self):
        with pytest.raises(ConfigError) as info:
            parse_experiment_spec(_config("penalty_sweep", {"penalties": [[20, 2], [-1, 3], [5]]}))
        assert len([p for p in info.value.problems if p.startswith("experiment.penalties[")]) == 2

    def test_sampled_mode_needs_shots(self):
        with pytest.raises(ConfigError) as info:
            parse_experiment_spec(_config("full_range", mode="sampled"))
        assert "train.shots: sampled mode needs a shot count" in info.value.problems

    def test_shots_select_sampled_mode(self):
        spec = parse_experiment_spec(_config("full_range", mode="sampled", shots=500))
        assert spec.train.mode.shots == 500

    def test_bad_range(self):
        with pytest.raises(ConfigError) as info:
            parse_experiment_spec(_config("full_range", {"train_range": [0.5, 0.2]}))
        assert any(p.startswith("experiment.train_range:") for p in info.value.problems)

    def test_penalty_sweep_on_centered_data(self):
        spec = parse_experiment_spec(_config("penalty_sweep", {"a0": 0.25, "penalties": [[10, 2]]}))
        assert isinstance(spec.task, CenteredTask)
        assert spec.task.a0 == 0.25

    def test_penalty_sweep_rejects_a0_with_ranges(self):
        data = _config("penalty_sweep", {"a0": 0.25, "train_range": [0, 1], "penalties": [[10, 2]]})
        with pytest.raises(ConfigError) as info:
            parse_experiment_spec(data)
        assert "experiment: give either a0 or train_range/test_range, not both" in info.value.problems

    def test_custom_assignment(self):
        assignment = {"m00": "class1", "m10": "class2", "m01": "inconclusive", "m11": "inconclusive"}
        spec = parse_experiment_spec(_config("full_range", assignment=assignment))
        assert spec.train.assignment.mapping["m10"].value == "class2"

    def test_incomplete_assignment(self):
        with pytest.raises(ConfigError) as info:
            parse_experiment_spec(_config("full_range", assignment={"m00": "class1"}))
        assert any(p.startswith("train.assignment:") for p in info.value.problems)

    def test_mixture_distribution(self):
        data = _config(
            "distribution_classification",
            {
                "a_distributions": {
                    "mix": {
                        "kind": "mixture",
                        "components": [
                            {"weight": 1, "distribution": {"kind": "uniform"}},
                            {"weight": 3, "distribution": 0.5},
                        ],
                    }
                },
                "b_distributions": {"fixed": 0.7},
            },
        )
        spec = parse_experiment_spec(data)
        mixture = spec.a_distributions[0][1]
        assert mixture.weights == (0.25, 0.75)

    def test_truncated_normal_needs_sigma(self):
        data = _config(
            "distribution_classification",
            {"a_distributions": {"n": {"kind": "truncated_normal", "mu": 0.2}}, "b_distributions": {"f": 0.7}},
        )
        with pytest.raises(ConfigError) as info:
            parse_experiment_spec(data)
        assert "experiment.a_distributions.n: truncated_normal needs mu and sigma" in info.value.problems


class TestLoadExperimentSpec:
    """Tests for loading YAML files."""

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.stem)
    def test_shipped_configs_parse(self, path):
        spec = load_experiment_spec(path)
        assert spec.name == path.stem
        assert spec.seed == 2019

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.stem)
    def test_echo_reads_back(self, path):
        spec = load_experiment_spec(path)
        assert parse_experiment_spec(echo_spec(spec)) == spec

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            load_experiment_spec(tmp_path / "absent.yaml")
        assert "absent.yaml" in info.value.problems[0]

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("kind: [full_range\n")
        with pytest.raises(ConfigError) as info:
            load_experiment_spec(path)
        assert "invalid YAML" in info.value.problems[0]

    def test_centered_config_values(self):
        spec = load_experiment_spec(CONFIG_DIR / "centered_a0_025.yaml")
        assert spec.task == CenteredTask(a0=0.25, sigma=0.01, train_size=100)
        assert spec.train.cost == CostConfig(alpha_err=25, alpha_inc=2)
        assert spec.train.gradient_step == 1e-6
        assert spec.repetitions == 50


class TestApplyOverrides:
    """Tests for apply_overrides."""

    def test_overrides_take_precedence(self):
        spec = parse_experiment_spec(_config("full_range"))
        updated = apply_overrides(spec, seed=9, repetitions=3, shots=100, iterations=7, output="out")
        assert (updated.seed, updated.repetitions, updated.output) == (9, 3, "out")
        assert updated.train.mode.shots == 100
        assert updated.train.max_iterations == 7
        assert updated.shots == ()

    def test_shots_replace_shot_grid(self):
        spec = load_experiment_spec(CONFIG_DIR / "shot_convergence.yaml")
        updated = apply_overrides(spec, shots=50)
        assert updated.shots == (50,)
        assert [p.name for p in plan_cells(updated)] == [
            "exact",
            "shots=50,step=0.01,lr=0.001",
            "shots=50,step=0.001,lr=0.001",
        ]

    def test_no_overrides(self):
        spec = parse_experiment_spec(_config("full_range"))
        assert apply_overrides(spec) == spec

    def test_invalid_overrides(self):
        spec = parse_experiment_spec(_config("full_range"))
        with pytest.raises(ConfigError) as info:
            apply_overrides(spec, repetitions=0, shots=0)
        assert len(info.value.problems) == 2


class TestPlanCells:
    """Tests for plan_cells."""

    def test_single_cell_kinds(self):
        spec = parse_experiment_spec(_config("full_range"))
        assert [p.name for p in plan_cells(spec)] == ["full_range"]

    def test_generalization(self):
        spec = parse_experiment_spec(_config("generalization", {"restricted_range": [0.8, 1.0]}))
        restricted, full = plan_cells(spec)
        assert (restricted.name, full.name) == ("restricted", "full")
        assert (restricted.task.train_lo, restricted.task.train_hi) == (0.8, 1.0)
        assert (full.task.train_lo, full.task.train_hi) == (0.0, 1.0)
        assert restricted.task.test_lo == full.task.test_lo == 0.0

    def test_penalty_sweep(self):
        spec = parse_experiment_spec(_config("penalty_sweep", {"penalties": [[20, 2], [5, 20]]}))
        plans = plan_cells(spec)
        assert [p.name for p in plans] == ["alpha_err=20,alpha_inc=2", "alpha_err=5,alpha_inc=20"]
        assert plans[1].train.cost == CostConfig(alpha_err=5, alpha_inc=20)
        assert plans[1].settings["alpha_inc"] == 20

    def test_shot_convergence(self):
        spec = load_experiment_spec(CONFIG_DIR / "shot_convergence.yaml")
        plans = plan_cells(spec)
        assert len(plans) == 1 + 3 * 2
        assert plans[0].name == "exact"
        assert not plans[0].train.mode.sampled
        assert plans[1].name == "shots=1000,step=0.01,lr=0.001"
        assert plans[1].train.mode.shots == 1000
        assert plans[2].train.gradient_step == 1e-3

    def test_optimizer_comparison(self):
        spec = load_experiment_spec(CONFIG_DIR / "optimizer_comparison.yaml")
        plans = plan_cells(spec)
        assert [p.name for p in plans] == ["sgd", "adam", "rmsprop"]
        assert [p.train.optimizer for p in plans] == list(OptimizerKind)

    def test_distribution_grid(self):
        spec = load_experiment_spec(CONFIG_DIR / "distribution_classification.yaml")
        plans = plan_cells(spec)
        assert len(plans) == 16
        assert plans[0].name == "normal_0.25/normal_0.25"
        assert plans[0].task.a_distribution == TruncatedNormal(mu=0.25, sigma=0.05)


class TestBuildEnsembles:
    """Tests for build_ensembles."""

    def test_range_task(self):
        task = RangeTask(train_lo=0.5, train_hi=1.0, train_size=6, test_size=4)
        train, test = build_ensembles(task, np.random.default_rng(0))
        assert [m.spec.family for m in train] == [Family.PSI1, Family.PSI23]
        assert train[0].samples == pytest.approx((0.5, 0.6, 0.7, 0.8, 0.9, 1.0))
        assert train[1].samples == (DEFAULT_B,)
        assert len(test[0].samples) == 4
        assert all(0.0 <= a <= 1.0 for a in test[0].samples)
        assert [m.spec.prior for m in train] == pytest.approx([1 / 3, 2 / 3])

    def test_centered_task(self):
        task = CenteredTask(a0=0.25, sigma=0.01, train_size=50)
        train, test = build_ensembles(task, np.random.default_rng(1))
        assert len(train[0].samples) == 50
        assert abs(np.mean(train[0].samples) - 0.25) < 0.01
        assert test[0].samples == (0.25,)
        assert test[1].samples == (DEFAULT_B,)

    def test_distribution_task(self):
        task = DistributionTask(
            a_distribution=TruncatedNormal(mu=0.7, sigma=0.05),
            b_distribution=TruncatedNormal(mu=0.3, sigma=0.05),
            train_size=5,
            test_size=7,
        )
        train, test = build_ensembles(task, np.random.default_rng(2))
        assert [len(m.samples) for m in train] == [5, 5]
        assert [len(m.samples) for m in test] == [7, 7]

    def test_seeded(self):
        task = RangeTask(train_size=3, test_size=5)
        first = build_ensembles(task, np.random.default_rng(3))
        second = build_ensembles(task, np.random.default_rng(3))
        assert first == second


def _summary(index: int, j1: float, p_suc: float) -> RunSummary:
    metrics = Metrics(p_suc=p_suc, p_err=0.0, p_inc=1.0 - p_suc)
    return RunSummary(
        run_index=index,
        seed=index,
        final_j1_estimated=j1,
        final_j1_exact=j1,
        train_metrics=metrics,
        test_metrics=metrics,
        wall_time=0.0,
    )


class TestAggregateRuns:
    """Tests for aggregate_runs."""

    def test_mean_and_sample_sd(self):
        stats = aggregate_runs([_summary(0, 1.0, 0.5), _summary(1, 3.0, 0.7)])
        assert stats.count == 2
        assert stats.mean["final_j1_exact"] == pytest.approx(2.0)
        assert stats.sd["final_j1_exact"] == pytest.approx(np.sqrt(2.0))
        assert stats.mean["test_p_suc"] == pytest.approx(0.6)

    def test_single_run_has_zero_sd(self):
        stats = aggregate_runs([_summary(0, 1.5, 0.8)])
        assert stats.sd["train_p_suc"] == 0.0


class TestRunExperiment:
    """Tests for run_experiment and sweep_penalties on tiny grids."""

    def test_full_range(self):
        report = run_experiment(parse_experiment_spec(_config("full_range")))
        (cell,) = report.cells
        assert not cell.failed
        assert len(cell.runs) == 2
        assert cell.aggregate.count == 2
        assert [r.seed for r in cell.runs] == run_seeds(5, 2)
        assert cell.runs[0].trajectory == ()
        assert report.config["kind"] == "full_range"

    def test_deterministic(self):
        spec = parse_experiment_spec(_config("full_range"))
        assert run_experiment(spec).cells[0].aggregate == run_experiment(spec).cells[0].aggregate

    def test_parallel_matches_serial(self):
        spec = parse_experiment_spec(_config("full_range"))
        serial = run_experiment(spec, jobs=1).cells[0].aggregate
        assert run_experiment(spec, jobs=2).cells[0].aggregate == serial

    def test_cells_share_run_seeds(self):
        spec = parse_experiment_spec(_config("penalty_sweep", {"penalties": [[20, 2], [5, 20]]}))
        report = run_experiment(spec)
        first, second = report.cells
        assert [r.seed for r in first.runs] == [r.seed for r in second.runs]

    def test_failed_cell_is_reported(self):
        spec = parse_experiment_spec(_config("full_range"))
        with patch(
            "povm_discriminator.experiments.runner.train",
            side_effect=NumericError("cost is nan"),
        ):
            report = run_experiment(spec)
        (cell,) = report.cells
        assert cell.failed
        assert "NumericError: cost is nan" in cell.error
        assert cell.aggregate is None

    def test_generalization_gap(self):
        report = run_experiment(parse_experiment_spec(_config("generalization")))
        gap = report.extras["p_suc_gap"]
        restricted, full = report.cell("restricted"), report.cell("full")
        assert gap == pytest.approx(
            abs(restricted.aggregate.mean["test_p_suc"] - full.aggregate.mean["test_p_suc"])
        )

    def test_distribution_extras(self):
        data = _config(
            "distribution_classification",
            {
                "a_distributions": {"low": {"kind": "uniform", "lo": 0.0, "hi": 0.3}, "high": 0.9},
                "b_distributions": {"mid": 0.5},
            },
        )
        report = run_experiment(parse_experiment_spec(data))
        assert [c.name for c in report.cells] == ["low/mid", "high/mid"]
        assert report.cell("high/mid").extras["mean_fidelity"] == pytest.approx(0.45)
        assert -1.0 <= report.extras["spearman_rho"] <= 1.0
        assert 0.0 <= report.extras["max_p_err"] <= 1.0

    def test_shot_extras(self):
        data = _config("shot_convergence", {"shots": [200], "moving_average_window": 2})
        report = run_experiment(parse_experiment_spec(data))
        sampled = report.cell("shots=200,step=0.001,lr=0.001")
        assert set(sampled.extras) == {"final_moving_average", "relative_sd", "relative_error"}
        assert sampled.settings["shots"] == 200

    def test_optimizer_curves(self):
        data = _config("optimizer_comparison", {"optimizers": ["sgd", "adam"], "record_trajectories": True})
        report = run_experiment(parse_experiment_spec(data))
        adam = report.cell("adam")
        assert len(adam.curves["j1_mean"]) == 2
        assert len(adam.runs[0].trajectory) == 2
        assert "plateaued_runs" in report.cell("sgd").extras

    def test_sweep_penalties(self):
        cells = sweep_penalties(
            [(10.0, 1.0), (0.0, 0.0)],
            TrainTemplate(minibatch_size=2, max_iterations=1),
            RangeTask(train_size=3, test_size=2),
            repetitions=1,
            seed=4,
        )
        assert [c.name for c in cells] == ["alpha_err=10,alpha_inc=1", "alpha_err=0,alpha_inc=0"]
        assert all(c.aggregate.count == 1 for c in cells)

    def test_sweep_penalties_empty_grid(self):
        with pytest.raises(ArityError):
            sweep_penalties([], TrainTemplate(), RangeTask(), repetitions=1)

    def test_a_curves(self):
        report = run_experiment(parse_experiment_spec(_config("full_range")))
        (cell,) = report.cells
        assert cell.curves["a"] == evenly_spaced(0.0, 1.0, CURVE_POINTS)
        assert all(len(cell.curves[k]) == CURVE_POINTS for k in ("p_suc", "p_err", "p_inc"))
        total = np.sum([cell.curves[k] for k in ("p_suc", "p_err", "p_inc")], axis=0)
        assert np.allclose(total, 1.0)
        runs_mean = np.mean([[row[0] for row in r.a_curve] for r in cell.runs], axis=0)
        assert np.allclose(cell.curves["p_suc"], runs_mean)

    def test_a_curves_follow_test_range(self):
        report = run_experiment(parse_experiment_spec(_config("generalization", {"test_range": [0.2, 0.6]})))
        for cell in report.cells:
            assert cell.curves["a"][0] == 0.2
            assert cell.curves["a"][-1] == pytest.approx(0.6)

    @pytest.mark.parametrize(
        "a0, p_suc",
        [(0.25, 5 / 6), (0.5, 2 / 3)],
    )
    def test_centered_optimum_references(self, a0, p_suc):
        report = run_experiment(parse_experiment_spec(_config("centered_a0", {"a0": a0})))
        assert report.extras["unambiguous_p_suc_bound"] == pytest.approx(p_suc)
        # Two-outcome optimum for psi1(a0) against the psi23 mixture at b = 1/sqrt(2).
        root = math.sqrt((2 / 3) ** 2 - 4 / 9 * a0**2)
        assert report.extras["helstrom_p_err_bound"] == pytest.approx((2 / 3 - root) / 2)
        assert report.cells[0].curves == {}

    def test_sweep_on_range_has_no_references(self):
        spec = parse_experiment_spec(_config("penalty_sweep", {"penalties": [[20, 2]]}))
        report = run_experiment(spec)
        assert "unambiguous_p_suc_bound" not in report.extras
        assert "a" in report.cells[0].curves

    def test_centered_sweep_has_references(self):
        spec = parse_experiment_spec(_config("penalty_sweep", {"a0": 0.25, "penalties": [[20, 2]]}))
        report = run_experiment(spec)
        assert report.extras["unambiguous_p_suc_bound"] == pytest.approx(5 / 6)

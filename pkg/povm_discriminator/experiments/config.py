"""YAML experiment configs: loading, validation and echo.

Every problem found is reported at once, each prefixed with the dotted
path of the offending field.
"""

import logging
from dataclasses import replace
from pathlib import Path
from typing import Any

import yaml

from povm_discriminator.errors import ConfigError, DiscriminatorError
from povm_discriminator.model.ensemble import (
    Distribution,
    Fixed,
    Mixture,
    OutcomeAssignment,
    TruncatedNormal,
    Uniform,
)
from povm_discriminator.model.experiment import (
    DEFAULT_B,
    DEFAULT_PRIORS,
    CenteredTask,
    DistributionTask,
    ExperimentKind,
    ExperimentSpec,
    RangeTask,
    Task,
    TrainTemplate,
)
from povm_discriminator.model.training import (
    EXACT,
    CostConfig,
    EvaluationMode,
    OptimizerKind,
    OptimizerSettings,
)

logger = logging.getLogger(__name__)

_TOP_KEYS = {"name", "kind", "seed", "repetitions", "output", "train", "experiment"}
_TRAIN_KEYS = {
    "cost",
    "optimizer",
    "minibatch_size",
    "gradient_step",
    "max_iterations",
    "mode",
    "shots",
    "assignment",
    "log_every",
}
_COST_KEYS = {"alpha_err", "alpha_inc", "scale"}
_OPTIMIZER_KEYS = {"kind", "learning_rate", "beta1", "beta2", "epsilon", "rms_decay"}
_COMMON_EXPERIMENT_KEYS = {"train_size", "test_size", "b", "priors", "record_trajectories"}
_RANGE_KEYS = {"train_range", "test_range"}
_CENTERED_KEYS = {"a0", "sigma"}
_EXPERIMENT_KEYS: dict[ExperimentKind, set[str]] = {
    ExperimentKind.CENTERED_A0: _CENTERED_KEYS,
    ExperimentKind.FULL_RANGE: _RANGE_KEYS,
    ExperimentKind.GENERALIZATION: _RANGE_KEYS | {"restricted_range"},
    ExperimentKind.DISTRIBUTION_CLASSIFICATION: {"a_distributions", "b_distributions"},
    ExperimentKind.PENALTY_SWEEP: _RANGE_KEYS | _CENTERED_KEYS | {"penalties"},
    ExperimentKind.SHOT_CONVERGENCE: _RANGE_KEYS
    | {"shots", "gradient_steps", "learning_rates", "moving_average_window"},
    ExperimentKind.OPTIMIZER_COMPARISON: _RANGE_KEYS | {"optimizers"},
}


class _Reader:
    """Typed field access that records problems instead of raising."""

    def __init__(self) -> None:
        self.problems: list[str] = []

    def add(self, path: str, message: str) -> None:
        self.problems.append(f"{path}: {message}")

    def section(self, data: Any, path: str, allowed: set[str]) -> dict[str, Any]:
        if data is None:
            return {}
        if not isinstance(data, dict):
            self.add(path, "expected a mapping")
            return {}
        for key in sorted(set(data) - allowed, key=str):
            self.add(f"{path}.{key}" if path else str(key), "unknown field")
        return data

    def number(self, data: dict, key: str, path: str, default: Any, *, integer: bool = False) -> Any:
        if key not in data or data[key] is None:
            return default
        value = data[key]
        wanted = int if integer else (int, float)
        if isinstance(value, bool) or not isinstance(value, wanted):
            self.add(f"{path}.{key}" if path else key, "expected an integer" if integer else "expected a number")
            return default
        return value if integer else float(value)

    def text(self, data: dict, key: str, path: str, default: str | None) -> str | None:
        if key not in data or data[key] is None:
            return default
        if not isinstance(data[key], str):
            self.add(f"{path}.{key}" if path else key, "expected a string")
            return default
        return data[key]

    def numbers(self, data: dict, key: str, path: str, default: tuple, *, integer: bool = False, length: int | None = None) -> tuple:
        if key not in data or data[key] is None:
            return default
        value = data[key]
        where = f"{path}.{key}"
        if not isinstance(value, list):
            self.add(where, "expected a list")
            return default
        wanted = int if integer else (int, float)
        if any(isinstance(v, bool) or not isinstance(v, wanted) for v in value):
            self.add(where, "expected a list of integers" if integer else "expected a list of numbers")
            return default
        if length is not None and len(value) != length:
            self.add(where, f"expected {length} entries, got {len(value)}")
            return default
        return tuple(value if integer else (float(v) for v in value))

    def build(self, path: str, factory, *args, **kwargs):
        """Call a validating constructor, recording its error under ``path``."""
        try:
            return factory(*args, **kwargs)
        except (DiscriminatorError, ValueError, KeyError) as e:
            self.add(path, str(e).strip("'\""))
            return None


def _distribution(reader: _Reader, data: Any, path: str) -> Distribution | None:
    if isinstance(data, (int, float)) and not isinstance(data, bool):
        return reader.build(path, Fixed, float(data))
    if not isinstance(data, dict) or "kind" not in data:
        reader.add(path, "expected a number or a mapping with a 'kind'")
        return None
    kind = data["kind"]
    if kind == "fixed":
        reader.section(data, path, {"kind", "value"})
        return reader.build(path, Fixed, reader.number(data, "value", path, 0.0))
    if kind == "uniform":
        reader.section(data, path, {"kind", "lo", "hi"})
        return reader.build(
            path, Uniform, reader.number(data, "lo", path, 0.0), reader.number(data, "hi", path, 1.0)
        )
    if kind == "truncated_normal":
        reader.section(data, path, {"kind", "mu", "sigma", "lo", "hi"})
        if "mu" not in data or "sigma" not in data:
            reader.add(path, "truncated_normal needs mu and sigma")
            return None
        return reader.build(
            path,
            TruncatedNormal,
            reader.number(data, "mu", path, 0.0),
            reader.number(data, "sigma", path, 1.0),
            reader.number(data, "lo", path, 0.0),
            reader.number(data, "hi", path, 1.0),
        )
    if kind == "mixture":
        reader.section(data, path, {"kind", "components"})
        components = data.get("components")
        if not isinstance(components, list) or not components:
            reader.add(f"{path}.components", "expected a nonempty list")
            return None
        parsed = []
        for i, item in enumerate(components):
            where = f"{path}.components[{i}]"
            item = reader.section(item, where, {"weight", "distribution"})
            inner = _distribution(reader, item.get("distribution"), f"{where}.distribution")
            if inner is not None:
                parsed.append((reader.number(item, "weight", where, 1.0), inner))
        if len(parsed) != len(components):
            return None
        return reader.build(path, Mixture, tuple(parsed))
    reader.add(f"{path}.kind", f"unknown distribution kind {kind!r}")
    return None


def _named_distributions(reader: _Reader, data: dict, key: str) -> tuple[tuple[str, Distribution], ...]:
    path = f"experiment.{key}"
    entries = data.get(key)
    if entries is None:
        return ()
    if not isinstance(entries, dict) or not entries:
        reader.add(path, "expected a nonempty mapping of name to distribution")
        return ()
    named = []
    for name, spec in entries.items():
        dist = _distribution(reader, spec, f"{path}.{name}")
        if dist is not None:
            named.append((str(name), dist))
    return tuple(named)


def _train_template(reader: _Reader, data: Any) -> TrainTemplate:
    data = reader.section(data, "train", _TRAIN_KEYS)
    defaults = TrainTemplate()

    cost_data = reader.section(data.get("cost"), "train.cost", _COST_KEYS)
    cost = reader.build(
        "train.cost",
        CostConfig,
        alpha_err=reader.number(cost_data, "alpha_err", "train.cost", 0.0),
        alpha_inc=reader.number(cost_data, "alpha_inc", "train.cost", 0.0),
        scale=reader.number(cost_data, "scale", "train.cost", 1.0),
    )

    opt_data = reader.section(data.get("optimizer"), "train.optimizer", _OPTIMIZER_KEYS)
    kind = reader.build(
        "train.optimizer.kind", OptimizerKind, reader.text(opt_data, "kind", "train.optimizer", "adam")
    )
    base = OptimizerSettings()
    settings = reader.build(
        "train.optimizer",
        OptimizerSettings,
        **{
            key: reader.number(opt_data, key, "train.optimizer", getattr(base, key))
            for key in ("learning_rate", "beta1", "beta2", "epsilon", "rms_decay")
        },
    )

    mode_name = reader.text(data, "mode", "train", None)
    shots = reader.number(data, "shots", "train", None, integer=True)
    mode = EXACT
    if mode_name not in (None, "exact", "sampled"):
        reader.add("train.mode", f"expected 'exact' or 'sampled', got {mode_name!r}")
    elif mode_name == "exact" and shots is not None:
        reader.add("train.shots", "shots given but mode is 'exact'")
    elif mode_name == "sampled" and shots is None:
        reader.add("train.shots", "sampled mode needs a shot count")
    elif shots is not None:
        mode = reader.build("train.shots", EvaluationMode, shots) or EXACT

    assignment = defaults.assignment
    if data.get("assignment") is not None:
        raw = data["assignment"]
        if isinstance(raw, dict):
            assignment = reader.build(
                "train.assignment", OutcomeAssignment, {str(k): v for k, v in raw.items()}
            ) or defaults.assignment
        else:
            reader.add("train.assignment", "expected a mapping of outcome to label")

    template = TrainTemplate(
        cost=cost or defaults.cost,
        optimizer=kind or defaults.optimizer,
        settings=settings or defaults.settings,
        minibatch_size=reader.number(data, "minibatch_size", "train", defaults.minibatch_size, integer=True),
        gradient_step=reader.number(data, "gradient_step", "train", defaults.gradient_step),
        max_iterations=reader.number(data, "max_iterations", "train", defaults.max_iterations, integer=True),
        mode=mode,
        assignment=assignment,
        log_every=reader.number(data, "log_every", "train", defaults.log_every, integer=True),
    )
    if template.minibatch_size < 1:
        reader.add("train.minibatch_size", "must be at least 1")
    if template.gradient_step <= 0:
        reader.add("train.gradient_step", "must be positive")
    if template.max_iterations < 0:
        reader.add("train.max_iterations", "must be nonnegative")
    return template


def _task(reader: _Reader, kind: ExperimentKind, data: dict) -> Task | None:
    path = "experiment"
    priors = reader.numbers(data, "priors", path, DEFAULT_PRIORS, length=2)
    train_size = reader.number(data, "train_size", path, 100, integer=True)
    test_size = reader.number(data, "test_size", path, 150, integer=True)
    b = reader.number(data, "b", path, DEFAULT_B)
    centered = kind is ExperimentKind.CENTERED_A0
    if kind is ExperimentKind.PENALTY_SWEEP and "a0" in data:
        # A sweep runs on centered data when a0 is given, else on a range.
        if _RANGE_KEYS & set(data):
            reader.add(path, "give either a0 or train_range/test_range, not both")
            return None
        centered = True
    if centered:
        return reader.build(
            path,
            CenteredTask,
            a0=reader.number(data, "a0", path, 0.25),
            sigma=reader.number(data, "sigma", path, 0.01),
            train_size=train_size,
            b=b,
            priors=priors,
        )
    if kind is ExperimentKind.DISTRIBUTION_CLASSIFICATION:
        # Sizes and priors only; each cell brings its own distributions.
        return reader.build(
            path,
            DistributionTask,
            a_distribution=Uniform(),
            b_distribution=Fixed(DEFAULT_B),
            train_size=train_size,
            test_size=test_size,
            priors=priors,
        )
    train_lo, train_hi = reader.numbers(data, "train_range", path, (0.0, 1.0), length=2)
    test_lo, test_hi = reader.numbers(data, "test_range", path, (0.0, 1.0), length=2)
    for name, (lo, hi) in (("train_range", (train_lo, train_hi)), ("test_range", (test_lo, test_hi))):
        if not 0.0 <= lo <= hi <= 1.0:
            reader.add(f"{path}.{name}", f"[{lo}, {hi}] must lie inside [0, 1]")
            return None
    return reader.build(
        path,
        RangeTask,
        train_lo=train_lo,
        train_hi=train_hi,
        train_size=train_size,
        test_lo=test_lo,
        test_hi=test_hi,
        test_size=test_size,
        b=b,
        priors=priors,
    )


def _penalty_grid(reader: _Reader, data: dict) -> tuple[tuple[float, float], ...]:
    raw = data.get("penalties")
    if raw is None:
        return ()
    if not isinstance(raw, list):
        reader.add("experiment.penalties", "expected a list of [alpha_err, alpha_inc] pairs")
        return ()
    grid = []
    for i, pair in enumerate(raw):
        ok = (
            isinstance(pair, list)
            and len(pair) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0 for v in pair)
        )
        if not ok:
            reader.add(f"experiment.penalties[{i}]", "expected [alpha_err, alpha_inc] with nonnegative entries")
            continue
        grid.append((float(pair[0]), float(pair[1])))
    return tuple(grid)


def parse_experiment_spec(data: Any) -> ExperimentSpec:
    """Validate a parsed YAML document into an ExperimentSpec."""
    reader = _Reader()
    if not isinstance(data, dict):
        raise ConfigError(["<root>: expected a mapping"])
    reader.section(data, "", _TOP_KEYS)

    kind = None
    kind_name = reader.text(data, "kind", "", None)
    if kind_name is None:
        reader.add("kind", "required")
    else:
        kind = reader.build("kind", ExperimentKind, kind_name)

    seed = reader.number(data, "seed", "", 0, integer=True)
    if seed < 0:
        reader.add("seed", "must be nonnegative")
    repetitions = reader.number(data, "repetitions", "", 1, integer=True)
    if repetitions < 1:
        reader.add("repetitions", "must be at least 1")

    train = _train_template(reader, data.get("train"))
    if kind is None:
        raise ConfigError(reader.problems)

    allowed = _COMMON_EXPERIMENT_KEYS | _EXPERIMENT_KEYS[kind]
    experiment = reader.section(data.get("experiment"), "experiment", allowed)
    task = _task(reader, kind, experiment)

    extras: dict[str, Any] = {
        "penalties": _penalty_grid(reader, experiment),
        "restricted_range": reader.numbers(experiment, "restricted_range", "experiment", (0.9, 1.0), length=2),
        "a_distributions": _named_distributions(reader, experiment, "a_distributions"),
        "b_distributions": _named_distributions(reader, experiment, "b_distributions"),
        "shots": reader.numbers(experiment, "shots", "experiment", (), integer=True),
        "gradient_steps": reader.numbers(experiment, "gradient_steps", "experiment", ()),
        "learning_rates": reader.numbers(experiment, "learning_rates", "experiment", ()),
        "moving_average_window": reader.number(experiment, "moving_average_window", "experiment", 500, integer=True),
        "record_trajectories": bool(experiment.get("record_trajectories", False)),
    }
    names = experiment.get("optimizers", ["sgd", "adam", "rmsprop"] if kind is ExperimentKind.OPTIMIZER_COMPARISON else [])
    if not isinstance(names, list):
        reader.add("experiment.optimizers", "expected a list")
        names = []
    optimizers = [reader.build(f"experiment.optimizers[{i}]", OptimizerKind, n) for i, n in enumerate(names)]
    extras["optimizers"] = tuple(o for o in optimizers if o is not None)

    _check_grids(reader, kind, extras)
    if task is not None and train.minibatch_size > task.train_size:
        reader.add("train.minibatch_size", f"exceeds experiment.train_size ({task.train_size})")
    if any(s < 1 for s in extras["shots"]):
        reader.add("experiment.shots", "every shot count must be at least 1")

    if reader.problems:
        raise ConfigError(reader.problems)
    spec = ExperimentSpec(
        name=reader.text(data, "name", "", kind.value),
        kind=kind,
        task=task,
        train=train,
        seed=seed,
        repetitions=repetitions,
        output=reader.text(data, "output", "", None),
        **extras,
    )
    logger.info("Loaded %s experiment %r", spec.kind.value, spec.name)
    return spec


def _check_grids(reader: _Reader, kind: ExperimentKind, extras: dict[str, Any]) -> None:
    required = {
        ExperimentKind.PENALTY_SWEEP: ("penalties",),
        ExperimentKind.DISTRIBUTION_CLASSIFICATION: ("a_distributions", "b_distributions"),
        ExperimentKind.SHOT_CONVERGENCE: ("shots",),
        ExperimentKind.OPTIMIZER_COMPARISON: ("optimizers",),
    }
    for key in required.get(kind, ()):
        if not extras[key]:
            reader.add(f"experiment.{key}", f"required for {kind.value}")


def load_experiment_spec(path: str | Path) -> ExperimentSpec:
    """Read and validate a YAML experiment config."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError([f"{path}: {e.strerror or e}"]) from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError([f"{path}: invalid YAML ({e})"]) from e
    return parse_experiment_spec(data)


def apply_overrides(
    spec: ExperimentSpec,
    *,
    seed: int | None = None,
    repetitions: int | None = None,
    shots: int | None = None,
    iterations: int | None = None,
    output: str | None = None,
) -> ExperimentSpec:
    """Command-line values take precedence over the config file."""
    problems = []
    if seed is not None and seed < 0:
        problems.append("--seed: must be nonnegative")
    if repetitions is not None and repetitions < 1:
        problems.append("--repetitions: must be at least 1")
    if shots is not None and shots < 1:
        problems.append("--shots: must be at least 1")
    if iterations is not None and iterations < 0:
        problems.append("--iterations: must be nonnegative")
    if problems:
        raise ConfigError(problems)

    train = spec.train
    shot_grid = spec.shots
    if shots is not None:
        train = replace(train, mode=EvaluationMode(shots=shots))
        if spec.kind is ExperimentKind.SHOT_CONVERGENCE:
            shot_grid = (shots,)
    if iterations is not None:
        train = replace(train, max_iterations=iterations)
    return replace(
        spec,
        seed=spec.seed if seed is None else seed,
        repetitions=spec.repetitions if repetitions is None else repetitions,
        output=spec.output if output is None else output,
        train=train,
        shots=shot_grid,
    )


def distribution_to_dict(dist: Distribution) -> dict[str, Any]:
    """The config form of a distribution."""
    if isinstance(dist, Fixed):
        return {"kind": "fixed", "value": dist.value}
    if isinstance(dist, Uniform):
        return {"kind": "uniform", "lo": dist.lo, "hi": dist.hi}
    if isinstance(dist, TruncatedNormal):
        return {"kind": "truncated_normal", "mu": dist.mu, "sigma": dist.sigma, "lo": dist.lo, "hi": dist.hi}
    return {
        "kind": "mixture",
        "components": [
            {"weight": w, "distribution": distribution_to_dict(d)} for w, d in dist.components
        ],
    }


def _experiment_section(spec: ExperimentSpec) -> dict[str, Any]:
    task = spec.task
    section: dict[str, Any] = {"priors": list(task.priors), "train_size": task.train_size}
    if isinstance(task, CenteredTask):
        section.update(a0=task.a0, sigma=task.sigma, b=task.b)
    elif isinstance(task, RangeTask):
        section.update(
            train_range=[task.train_lo, task.train_hi],
            test_range=[task.test_lo, task.test_hi],
            test_size=task.test_size,
            b=task.b,
        )
    else:
        section["test_size"] = task.test_size
    kind = spec.kind
    if kind is ExperimentKind.GENERALIZATION:
        section["restricted_range"] = list(spec.restricted_range)
    elif kind is ExperimentKind.DISTRIBUTION_CLASSIFICATION:
        section["a_distributions"] = {n: distribution_to_dict(d) for n, d in spec.a_distributions}
        section["b_distributions"] = {n: distribution_to_dict(d) for n, d in spec.b_distributions}
    elif kind is ExperimentKind.PENALTY_SWEEP:
        section["penalties"] = [list(p) for p in spec.penalties]
    elif kind is ExperimentKind.SHOT_CONVERGENCE:
        section.update(
            shots=list(spec.shots),
            gradient_steps=list(spec.gradient_steps),
            learning_rates=list(spec.learning_rates),
            moving_average_window=spec.moving_average_window,
        )
    elif kind is ExperimentKind.OPTIMIZER_COMPARISON:
        section["optimizers"] = [o.value for o in spec.optimizers]
    if spec.record_trajectories:
        section["record_trajectories"] = True
    return section


def echo_spec(spec: ExperimentSpec) -> dict[str, Any]:
    """The spec in config-file form; parse_experiment_spec reads it back."""
    t = spec.train
    train: dict[str, Any] = {
        "cost": {"alpha_err": t.cost.alpha_err, "alpha_inc": t.cost.alpha_inc, "scale": t.cost.scale},
        "optimizer": {
            "kind": t.optimizer.value,
            "learning_rate": t.settings.learning_rate,
            "beta1": t.settings.beta1,
            "beta2": t.settings.beta2,
            "epsilon": t.settings.epsilon,
            "rms_decay": t.settings.rms_decay,
        },
        "minibatch_size": t.minibatch_size,
        "gradient_step": t.gradient_step,
        "max_iterations": t.max_iterations,
        "mode": t.mode.name,
        "assignment": {k: v.value for k, v in t.assignment.mapping.items()},
        "log_every": t.log_every,
    }
    if t.mode.sampled:
        train["shots"] = t.mode.shots
    echo: dict[str, Any] = {
        "name": spec.name,
        "kind": spec.kind.value,
        "seed": spec.seed,
        "repetitions": spec.repetitions,
        "train": train,
        "experiment": _experiment_section(spec),
    }
    if spec.output is not None:
        echo["output"] = spec.output
    return echo


"""CLI entry point for the POVM discriminator."""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import yaml

from povm_discriminator.circuit import describe_topology
from povm_discriminator.errors import (
    ConfigError,
    DiscriminatorError,
    ReportWriteError,
    TrainingAborted,
)
from povm_discriminator.experiments import apply_overrides, echo_spec, load_experiment_spec, run_experiment
from povm_discriminator.experiments.runner import plan_cells, run_seeds, train_run
from povm_discriminator.model.experiment import ExperimentKind, ExperimentReport, ExperimentSpec
from povm_discriminator.model.training import TrainResult
from povm_discriminator.report import WRITERS, export_report

DEFAULT_OUTPUT = "results"


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Enable verbose logging",
    )
    common.add_argument(
        "--debug",
        action="store_true",
        help="Enable debug logging (very verbose)",
    )
    return common


def _run_parser(common: argparse.ArgumentParser) -> argparse.ArgumentParser:
    run = argparse.ArgumentParser(add_help=False, parents=[common])
    run.add_argument("config", help="YAML experiment config")
    run.add_argument("--seed", type=int, help="Top-level seed (overrides the config)")
    run.add_argument(
        "-o",
        "--out",
        help=f"Output file or directory (default: config 'output' or {DEFAULT_OUTPUT}/)",
    )
    run.add_argument(
        "-f",
        "--format",
        choices=sorted(WRITERS),
        default="csv",
        help="Output format (default: csv)",
    )
    run.add_argument(
        "-j",
        "--jobs",
        type=int,
        default=1,
        help="Parallel worker processes for repetitions (default: 1)",
    )
    run.add_argument("--shots", type=int, help="Train in sampled mode with this many shots")
    run.add_argument("--repetitions", type=int, help="Runs per cell (overrides the config)")
    run.add_argument("--iterations", type=int, help="Training iterations (overrides the config)")
    run.add_argument(
        "--timing",
        action="store_true",
        help="Include wall-clock times in the output",
    )
    return run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="povm-discriminator",
        description="Train parametrized POVM circuits to discriminate non-orthogonal states",
    )
    common = _common_parser()
    run = _run_parser(common)
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser(
        "train", parents=[run], help="Train a single run and write its trajectory"
    )
    commands.add_parser(
        "experiment", parents=[run], help="Run every cell of an experiment config"
    )
    commands.add_parser(
        "sweep", parents=[run], help="Run a penalty_sweep config over its (alpha_err, alpha_inc) grid"
    )
    topology = commands.add_parser(
        "topology", parents=[common], help="Print the discriminator circuit topology as YAML"
    )
    topology.add_argument("-o", "--out", help="Write the topology to this file instead of stdout")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the povm-discriminator CLI."""
    args = _build_parser().parse_args(argv)

    # Configure logging
    if args.debug:
        log_level = logging.DEBUG
    elif args.verbose:
        log_level = logging.INFO
    else:
        log_level = logging.WARNING

    logging.basicConfig(
        level=log_level,
        format="%(levelname)s: %(message)s",
    )

    try:
        if args.command == "topology":
            return _topology(args)
        spec = _load(args)
        if args.command == "train":
            return _train(spec, args)
        if args.command == "sweep" and spec.kind is not ExperimentKind.PENALTY_SWEEP:
            raise ConfigError([f"kind: sweep needs a penalty_sweep config, got {spec.kind.value}"])
        return _experiment(spec, args)
    except (ConfigError, ReportWriteError) as e:
        _print_error(e)
        return 1
    except DiscriminatorError as e:
        _print_error(e)
        logging.debug("Full traceback:", exc_info=True)
        return 2


def _load(args: argparse.Namespace) -> ExperimentSpec:
    if args.jobs < 1:
        raise ConfigError(["--jobs: must be at least 1"])
    spec = load_experiment_spec(args.config)
    return apply_overrides(
        spec,
        seed=args.seed,
        repetitions=args.repetitions,
        shots=args.shots,
        iterations=args.iterations,
        output=args.out,
    )


def _print_error(error: Exception) -> None:
    """One-line machine-readable error record on stderr."""
    record = {
        "error": type(error).__name__,
        "message": str(error),
        "details": list(getattr(error, "problems", [])),
    }
    print(json.dumps(record), file=sys.stderr)


def _output(spec: ExperimentSpec) -> Path:
    return Path(spec.output or DEFAULT_OUTPUT)


def _topology(args: argparse.Namespace) -> int:
    text = yaml.safe_dump(describe_topology(), sort_keys=False)
    if args.out is None:
        print(text, end="")
        return 0
    path = Path(args.out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ReportWriteError(f"cannot write {path}: {e.strerror or e}") from e
    print(f"Wrote {path}")
    return 0


def _train(spec: ExperimentSpec, args: argparse.Namespace) -> int:
    plan = plan_cells(spec)[0]
    # --shots trains in sampled mode even where the first cell is the exact reference.
    template = plan.train if args.shots is None else replace(plan.train, mode=spec.train.mode)
    seed = run_seeds(spec.seed, 1)[0]
    print(f"Training {spec.name}: cell {plan.name}, {template.mode.name} mode, seed {seed}")

    writer = WRITERS[args.format](include_timing=args.timing)
    status = 0
    try:
        result, _, _ = train_run(plan.task, template, seed)
    except TrainingAborted as e:
        _print_error(e)
        result = e.partial
        status = 2
    path = writer.write_train_result(result, echo_spec(spec), _output(spec), name=spec.name)

    print(f"\n{'=' * 50}")
    print("Training complete:" if status == 0 else "Training aborted:")
    _print_result(result)
    print(f"  Output:          {path}")
    return status


def _print_result(result: TrainResult) -> None:
    print(f"  Iterations:      {result.iterations}")
    print(f"  Final J1:        {result.final_j1_exact:.6g}")
    metrics = result.test_metrics or result.train_metrics
    print(
        f"  P_suc/P_err/P_inc: {metrics.p_suc:.4f} / {metrics.p_err:.4f} / {metrics.p_inc:.4f}"
    )


def _experiment(spec: ExperimentSpec, args: argparse.Namespace) -> int:
    print(
        f"Experiment: {spec.name} ({spec.kind.value}), "
        f"{spec.repetitions} run(s) per cell, seed {spec.seed}"
    )
    report = run_experiment(spec, jobs=args.jobs)
    path = export_report(report, _output(spec), args.format, include_timing=args.timing)
    return _summarize(report, path)


def _summarize(report: ExperimentReport, path: Path) -> int:
    errors: list[str] = []
    for cell in report.cells:
        if cell.failed:
            error_msg = f"  ERROR: cell {cell.name}: {cell.error}"
            print(error_msg, file=sys.stderr)
            errors.append(error_msg)
            continue
        mean, sd = cell.aggregate.mean, cell.aggregate.sd
        print(
            f"  {cell.name}: P_suc {mean['test_p_suc']:.4f} ± {sd['test_p_suc']:.4f}, "
            f"P_err {mean['test_p_err']:.4f} ± {sd['test_p_err']:.4f}, "
            f"P_inc {mean['test_p_inc']:.4f} ± {sd['test_p_inc']:.4f}"
        )

    # Summary
    print(f"\n{'=' * 50}")
    print("Experiment complete:")
    print(f"  Cells run:       {len(report.cells)}")
    for key, value in report.extras.items():
        print(f"  {key}: {value:.6g}")
    print(f"  Output:          {path}")

    if errors:
        print(f"\n  Errors ({len(errors)}):")
        for err in errors:
            print(f"    {err}")
        return 2

    return 0


if __name__ == "__main__":
    sys.exit(main())

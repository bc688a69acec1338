"""JSON report writer and reader.

File I/O is handled by the BaseReportWriter superclass.
"""

import json
from pathlib import Path
from typing import Any

from povm_discriminator.errors import ConfigError
from povm_discriminator.model.ensemble import Metrics
from povm_discriminator.model.experiment import (
    AggregateStats,
    CellReport,
    ExperimentKind,
    ExperimentReport,
    RunSummary,
)
from povm_discriminator.model.training import TrainResult, TrajectoryPoint
from povm_discriminator.report.base import BaseReportWriter, format_number


def _clean(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return format_number(value)


def _point(point: TrajectoryPoint) -> dict[str, Any]:
    return {
        "iteration": point.iteration,
        "j1_estimated": point.j1_estimated,
        "j1_exact": point.j1_exact,
        "p_suc": point.p_suc,
        "p_err": point.p_err,
        "p_inc": point.p_inc,
    }


def _metrics(metrics: Metrics | None) -> dict[str, float] | None:
    return None if metrics is None else metrics.as_dict()


class JSONReportWriter(BaseReportWriter):
    """Writes the full nested report, including config echo and seeds."""

    FILE_EXTENSION = ".json"

    def _run(self, run: RunSummary) -> dict[str, Any]:
        data: dict[str, Any] = {
            "run_index": run.run_index,
            "seed": run.seed,
            "final_j1_estimated": run.final_j1_estimated,
            "final_j1_exact": run.final_j1_exact,
            "train": _metrics(run.train_metrics),
            "test": _metrics(run.test_metrics),
            "input_fidelity": run.input_fidelity,
        }
        if run.trajectory:
            data["trajectory"] = [_point(p) for p in run.trajectory]
        if self.include_timing:
            data["wall_time"] = run.wall_time
        return data

    def _cell(self, cell: CellReport) -> dict[str, Any]:
        data: dict[str, Any] = {"name": cell.name, "settings": cell.settings}
        if cell.error is not None:
            data["error"] = cell.error
        if cell.aggregate is not None:
            data["aggregate"] = {
                "count": cell.aggregate.count,
                "mean": cell.aggregate.mean,
                "sd": cell.aggregate.sd,
            }
        if cell.extras:
            data["extras"] = cell.extras
        if cell.curves:
            data["curves"] = cell.curves
        data["runs"] = [self._run(run) for run in cell.runs]
        return data

    def render_report(self, report: ExperimentReport) -> str:
        document = {
            "name": report.name,
            "kind": report.kind.value,
            "seed": report.seed,
            "repetitions": report.repetitions,
            "config": report.config,
            "extras": report.extras,
            "cells": [self._cell(cell) for cell in report.cells],
            "errors": [{"cell": c.name, "error": c.error} for c in report.cells if c.failed],
        }
        return json.dumps(_clean(document), indent=2) + "\n"

    def render_train_result(self, result: TrainResult, config: dict[str, Any]) -> str:
        document: dict[str, Any] = {
            "seed": result.seed,
            "config": config,
            "iterations": result.iterations,
            "final_j1_estimated": result.final_j1_estimated,
            "final_j1_exact": result.final_j1_exact,
            "train": _metrics(result.train_metrics),
            "test": _metrics(result.test_metrics),
            "params": result.params.tolist(),
            "trajectory": [_point(p) for p in result.trajectory],
        }
        if self.include_timing:
            document["wall_time"] = result.wall_time
        return json.dumps(_clean(document), indent=2) + "\n"


def _load_metrics(data: dict[str, float] | None) -> Metrics | None:
    return None if data is None else Metrics(**data)


def _nan(value: float | None) -> float:
    return float("nan") if value is None else value


def _load_run(data: dict[str, Any]) -> RunSummary:
    return RunSummary(
        run_index=data["run_index"],
        seed=data["seed"],
        final_j1_estimated=_nan(data["final_j1_estimated"]),
        final_j1_exact=_nan(data["final_j1_exact"]),
        train_metrics=_load_metrics(data["train"]),
        test_metrics=_load_metrics(data["test"]),
        wall_time=data.get("wall_time", 0.0),
        input_fidelity=data.get("input_fidelity", 0.0),
        trajectory=tuple(TrajectoryPoint(**p) for p in data.get("trajectory", ())),
    )


def _load_cell(data: dict[str, Any]) -> CellReport:
    aggregate = None
    if "aggregate" in data:
        raw = data["aggregate"]
        aggregate = AggregateStats(
            count=raw["count"],
            mean={k: _nan(v) for k, v in raw["mean"].items()},
            sd={k: _nan(v) for k, v in raw["sd"].items()},
        )
    return CellReport(
        name=data["name"],
        settings=data["settings"],
        runs=tuple(_load_run(r) for r in data["runs"]),
        aggregate=aggregate,
        extras={k: _nan(v) for k, v in data.get("extras", {}).items()},
        curves={k: tuple(v) for k, v in data.get("curves", {}).items()},
        error=data.get("error"),
    )


def load_report_json(path: str | Path) -> ExperimentReport:
    """Reload a report written by JSONReportWriter."""
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
        return ExperimentReport(
            name=document["name"],
            kind=ExperimentKind(document["kind"]),
            seed=document["seed"],
            repetitions=document["repetitions"],
            config=document["config"],
            cells=tuple(_load_cell(c) for c in document["cells"]),
            extras={k: _nan(v) for k, v in document.get("extras", {}).items()},
        )
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ConfigError([f"{path}: not a readable report ({e})"]) from e

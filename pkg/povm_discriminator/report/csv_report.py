"""CSV report writer: one row per run plus mean and sd rows per cell.

File I/O is handled by the BaseReportWriter superclass.
"""

import csv
import io
from typing import Any

from povm_discriminator.model.experiment import CellReport, ExperimentReport, RunSummary
from povm_discriminator.model.training import TrainResult
from povm_discriminator.report.base import BaseReportWriter, format_number

REPORT_COLUMNS = (
    "row_type",
    "cell",
    "run_index",
    "seed",
    "alpha_err",
    "alpha_inc",
    "optimizer",
    "shots",
    "gradient_step",
    "learning_rate",
    "final_j1_estimated",
    "final_j1_exact",
    "train_p_suc",
    "train_p_err",
    "train_p_inc",
    "test_p_suc",
    "test_p_err",
    "test_p_inc",
)

TRAJECTORY_COLUMNS = ("iteration", "j1_estimated", "j1_exact", "p_suc", "p_err", "p_inc")

CURVE_COLUMNS = ("cell", "a", "p_suc", "p_err", "p_inc")

_SETTING_COLUMNS = ("alpha_err", "alpha_inc", "optimizer", "shots", "gradient_step", "learning_rate")
_STAT_COLUMNS = REPORT_COLUMNS[10:]


def _cell_text(value: Any) -> Any:
    value = format_number(value)
    return "" if value is None else value


def _run_values(run: RunSummary) -> dict[str, Any]:
    values: dict[str, Any] = {
        "run_index": run.run_index,
        "seed": run.seed,
        "final_j1_estimated": run.final_j1_estimated,
        "final_j1_exact": run.final_j1_exact,
        "wall_time": run.wall_time,
    }
    for prefix, metrics in (("train", run.train_metrics), ("test", run.test_metrics)):
        if metrics is not None:
            for name, value in metrics.as_dict().items():
                values[f"{prefix}_{name}"] = value
    return values


class CSVReportWriter(BaseReportWriter):
    """Writes reports and trajectories as plot-ready CSV tables."""

    FILE_EXTENSION = ".csv"

    def _columns(self) -> tuple[str, ...]:
        return REPORT_COLUMNS + (("wall_time",) if self.include_timing else ())

    def _cell_rows(self, cell: CellReport) -> list[dict[str, Any]]:
        common = {"cell": cell.name, **{k: cell.settings.get(k) for k in _SETTING_COLUMNS}}
        rows = [{"row_type": "run", **common, **_run_values(run)} for run in cell.runs]
        if cell.aggregate is not None:
            for row_type, stats in (("mean", cell.aggregate.mean), ("sd", cell.aggregate.sd)):
                rows.append(
                    {"row_type": row_type, **common, **{k: stats.get(k) for k in _STAT_COLUMNS}}
                )
        return rows

    def render_report(self, report: ExperimentReport) -> str:
        """Failed cells have no rows; their errors are kept in the JSON report."""
        buffer = io.StringIO()
        writer = csv.DictWriter(
            buffer, fieldnames=self._columns(), extrasaction="ignore", lineterminator="\n"
        )
        writer.writeheader()
        for cell in report.cells:
            for row in self._cell_rows(cell):
                writer.writerow({k: _cell_text(v) for k, v in row.items()})
        return buffer.getvalue()

    def render_curves(self, report: ExperimentReport) -> str | None:
        """Run-averaged metrics against a, one row per grid point per cell."""
        cells = [c for c in report.cells if "a" in c.curves]
        if not cells:
            return None
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CURVE_COLUMNS)
        for cell in cells:
            columns = [cell.curves[name] for name in CURVE_COLUMNS[1:]]
            for values in zip(*columns):
                writer.writerow([cell.name, *(_cell_text(v) for v in values)])
        return buffer.getvalue()

    def render_train_result(self, result: TrainResult, config: dict[str, Any]) -> str:
        """The per-iteration trajectory of one run."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        for point in result.trajectory:
            writer.writerow(
                [_cell_text(getattr(point, column)) for column in TRAJECTORY_COLUMNS]
            )
        return buffer.getvalue()

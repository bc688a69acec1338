"""Report writers for the supported output formats."""

from pathlib import Path

from povm_discriminator.errors import ConfigError
from povm_discriminator.model.experiment import ExperimentReport
from povm_discriminator.report.base import BaseReportWriter
from povm_discriminator.report.csv_report import CSVReportWriter
from povm_discriminator.report.json_report import JSONReportWriter, load_report_json

WRITERS: dict[str, type[BaseReportWriter]] = {
    "csv": CSVReportWriter,
    "json": JSONReportWriter,
}


def export_report(
    report: ExperimentReport, path: str | Path, format: str = "csv", include_timing: bool = False
) -> Path:
    """Write ``report`` in ``format``; returns the file written."""
    try:
        writer = WRITERS[format](include_timing=include_timing)
    except KeyError:
        raise ConfigError([f"format: expected one of {sorted(WRITERS)}, got {format!r}"]) from None
    return writer.write_report(report, path)


__all__ = [
    "BaseReportWriter",
    "CSVReportWriter",
    "JSONReportWriter",
    "WRITERS",
    "export_report",
    "load_report_json",
]

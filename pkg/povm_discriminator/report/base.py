"""Base report writer with shared file I/O logic for all output formats.

Subclasses implement render_report() and render_train_result() to
produce format-specific text.
"""

import logging
import math
from pathlib import Path
from typing import Any

from povm_discriminator.errors import ReportWriteError
from povm_discriminator.model.experiment import ExperimentReport
from povm_discriminator.model.training import TrainResult
from povm_discriminator.utils import round_sig, sanitize_filename

logger = logging.getLogger(__name__)


class BaseReportWriter:
    """Abstract base writer for experiment reports and training results.

    Handles output paths and file writing. Wall times are left out unless
    ``include_timing`` is set, so that fixed-seed reports are reproducible
    byte for byte. Subclasses must set FILE_EXTENSION.
    """

    FILE_EXTENSION: str = ""

    def __init__(self, include_timing: bool = False) -> None:
        self.include_timing = include_timing

    def output_path(self, path: str | Path, name: str) -> Path:
        """``path`` itself if it names a file, else ``path/<name><ext>``."""
        path = Path(path)
        if path.suffix:
            return path
        return path / f"{sanitize_filename(name)}{self.FILE_EXTENSION}"

    def write_report(self, report: ExperimentReport, path: str | Path) -> Path:
        """Render and write an experiment report; returns the file written.

        Formats with a separate curve table write it next to the report as
        ``<name>_curves<ext>``.
        """
        target = self.output_path(path, report.name)
        written = self._write(self.render_report(report), target)
        curves = self.render_curves(report)
        if curves is not None:
            self._write(curves, target.with_name(f"{target.stem}_curves{target.suffix}"))
        return written

    def write_train_result(
        self, result: TrainResult, config: dict[str, Any], path: str | Path, name: str = "train"
    ) -> Path:
        """Render and write a single training result."""
        return self._write(
            self.render_train_result(result, config), self.output_path(path, name)
        )

    def render_report(self, report: ExperimentReport) -> str:
        """Render an experiment report.

        Subclasses must override this method.
        """
        raise NotImplementedError

    def render_curves(self, report: ExperimentReport) -> str | None:
        """Render the per-a curve table, or None when the format embeds it."""
        return None

    def render_train_result(self, result: TrainResult, config: dict[str, Any]) -> str:
        """Render one training run.

        Subclasses must override this method.
        """
        raise NotImplementedError

    def _write(self, content: str, file_path: Path) -> Path:
        try:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            file_path.write_text(content, encoding="utf-8")
        except OSError as e:
            raise ReportWriteError(f"cannot write {file_path}: {e.strerror or e}") from e
        logger.info("Wrote %s", file_path)
        return file_path


def format_number(value: Any) -> Any:
    """Round floats to the report precision; NaN and infinities become None."""
    if isinstance(value, bool) or not isinstance(value, float):
        return value
    if not math.isfinite(value):
        return None
    return round_sig(value)

"""Exception hierarchy for the discriminator toolkit.

Every error derives from DiscriminatorError and from the builtin it
refines, so callers can catch either.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from povm_discriminator.model.training import TrainResult


class DiscriminatorError(Exception):
    """Base class for all toolkit errors."""


class InvalidGateError(DiscriminatorError, ValueError):
    """A gate is malformed (non-unitary matrix, control equals target)."""


class QubitIndexError(DiscriminatorError, IndexError):
    """A qubit index lies outside the register."""


class ArityError(DiscriminatorError, ValueError):
    """Wrong number of angles, parameters, qubits or samples."""


class ShapeError(DiscriminatorError, ValueError):
    """Mismatched vector or matrix dimensions."""


class DomainError(DiscriminatorError, ValueError):
    """A parameter lies outside its mathematical domain."""


class NormalizationError(DiscriminatorError, ValueError):
    """A state or distribution is not normalized within tolerance."""


class AssignmentError(DiscriminatorError, KeyError):
    """Unknown outcome label or incomplete outcome assignment."""


class NumericError(DiscriminatorError, ArithmeticError):
    """A cost evaluation produced a non-finite value."""

    def __init__(self, message: str, component: int | None = None) -> None:
        super().__init__(message)
        self.component = component


class ConfigError(DiscriminatorError, ValueError):
    """Configuration validation failed; ``problems`` lists every field."""

    def __init__(self, problems: list[str]) -> None:
        self.problems = list(problems)
        super().__init__("; ".join(self.problems) or "invalid configuration")


class TrainingAborted(DiscriminatorError):
    """Training stopped early; ``partial`` holds the trajectory so far."""

    def __init__(self, message: str, partial: TrainResult) -> None:
        super().__init__(message)
        self.partial = partial


class ReportWriteError(DiscriminatorError, OSError):
    """A report could not be written; the message names the path."""

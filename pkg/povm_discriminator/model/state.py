"""Statevector and measurement-distribution models.

Qubit 0 is the most significant bit of a basis index: for n qubits the
basis state |b_0 b_1 ... b_{n-1}> has index sum(b_k * 2**(n-1-k)).
"""

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from povm_discriminator.errors import NormalizationError, ShapeError

NORM_TOLERANCE = 1e-10
MAX_QUBITS = 8


def _frozen_array(values: Iterable[complex] | np.ndarray, dtype: type) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class StateVector:
    """A normalized pure state over ``num_qubits`` qubits."""

    amplitudes: np.ndarray
    num_qubits: int

    def __post_init__(self) -> None:
        amplitudes = _frozen_array(self.amplitudes, complex).reshape(-1)
        object.__setattr__(self, "amplitudes", amplitudes)
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ShapeError(
                f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}"
            )
        if amplitudes.size != 2**self.num_qubits:
            raise ShapeError(
                f"expected {2**self.num_qubits} amplitudes for "
                f"{self.num_qubits} qubit(s), got {amplitudes.size}"
            )
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise NormalizationError(f"state norm^2 is {norm!r}, expected 1")

    @classmethod
    def from_amplitudes(cls, values: Iterable[complex] | np.ndarray) -> "StateVector":
        """Build a state, inferring the qubit count from the vector length."""
        amplitudes = np.asarray(values, dtype=complex).reshape(-1)
        num_qubits = int(amplitudes.size).bit_length() - 1
        if amplitudes.size == 0 or 2**num_qubits != amplitudes.size:
            raise ShapeError(f"length {amplitudes.size} is not a power of two")
        return cls(amplitudes=amplitudes, num_qubits=num_qubits)

    @classmethod
    def basis(cls, num_qubits: int, index: int = 0) -> "StateVector":
        """The computational basis state |index>."""
        amplitudes = np.zeros(2**num_qubits, dtype=complex)
        amplitudes[index] = 1.0
        return cls(amplitudes=amplitudes, num_qubits=num_qubits)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    def tensor(self, other: "StateVector") -> "StateVector":
        """|self> (x) |other>, with self on the leading qubits."""
        return StateVector(
            amplitudes=np.kron(self.amplitudes, other.amplitudes),
            num_qubits=self.num_qubits + other.num_qubits,
        )


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Born-rule probabilities over the bitstrings of measured qubits.

    ``probs[k]`` belongs to the bitstring whose bits, read in the order of
    ``qubits``, spell k in binary (first listed qubit most significant).
    ``labels`` names each entry; by default the bitstring itself.
    """

    probs: np.ndarray
    qubits: tuple[int, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        probs = _frozen_array(self.probs, float).reshape(-1)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if probs.size != 2 ** len(self.qubits):
            raise ShapeError(
                f"{len(self.qubits)} measured qubit(s) need {2 ** len(self.qubits)} "
                f"probabilities, got {probs.size}"
            )
        if not self.labels:
            width = len(self.qubits)
            object.__setattr__(
                self,
                "labels",
                tuple(format(k, f"0{width}b") for k in range(probs.size)),
            )
        elif len(self.labels) != probs.size:
            raise ShapeError("one label per probability is required")
        if np.any(probs < 0.0) or np.any(probs > 1.0 + NORM_TOLERANCE):
            raise NormalizationError("probabilities must lie in [0, 1]")
        if abs(float(probs.sum()) - 1.0) > NORM_TOLERANCE:
            raise NormalizationError(f"probabilities sum to {probs.sum()!r}")

    def as_dict(self) -> dict[str, float]:
        return {label: float(p) for label, p in zip(self.labels, self.probs)}

    def probability(self, label: str) -> float:
        return float(self.probs[self.labels.index(label)])

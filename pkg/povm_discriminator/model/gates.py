"""Gate models understood by the statevector engine."""

from dataclasses import dataclass

import numpy as np

from povm_discriminator.errors import ArityError, InvalidGateError

UNITARY_TOLERANCE = 1e-10


def ry_stack(thetas: np.ndarray) -> np.ndarray:
    """Ry for each angle in ``thetas``; shape thetas.shape + (2, 2)."""
    thetas = np.asarray(thetas, dtype=float)
    c, s = np.cos(thetas / 2.0), np.sin(thetas / 2.0)
    out = np.empty(thetas.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def rz_stack(thetas: np.ndarray) -> np.ndarray:
    """Rz for each angle in ``thetas``; shape thetas.shape + (2, 2)."""
    thetas = np.asarray(thetas, dtype=float)
    phase = np.exp(0.5j * thetas)
    out = np.zeros(thetas.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = phase.conjugate()
    out[..., 1, 1] = phase
    return out


def euler_stack(alphas: np.ndarray, betas: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """Rz(gamma) Ry(beta) Rz(alpha), elementwise over the angle arrays."""
    return rz_stack(gammas) @ ry_stack(betas) @ rz_stack(alphas)


def ry_matrix(theta: float) -> np.ndarray:
    """Ry(theta) = exp(-i theta Y / 2)."""
    return ry_stack(np.float64(theta))


def rz_matrix(theta: float) -> np.ndarray:
    """Rz(theta) = diag(exp(-i theta/2), exp(i theta/2))."""
    return rz_stack(np.float64(theta))


def euler_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Rz(gamma) Ry(beta) Rz(alpha): a general single-qubit rotation."""
    return euler_stack(np.float64(alpha), np.float64(beta), np.float64(gamma))


@dataclass(frozen=True, eq=False)
class SingleQubitGate:
    """An arbitrary 2x2 unitary on one target qubit."""

    matrix: np.ndarray
    target: int

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (2, 2):
            raise InvalidGateError(f"single-qubit matrix must be 2x2, got {matrix.shape}")
        deviation = np.max(np.abs(matrix.conj().T @ matrix - np.eye(2)))
        if deviation > UNITARY_TOLERANCE:
            raise InvalidGateError(f"matrix is not unitary (deviation {deviation:.3e})")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,)


@dataclass(frozen=True)
class CNOTGate:
    """Controlled NOT."""

    control: int
    target: int

    def __post_init__(self) -> None:
        if self.control == self.target:
            raise InvalidGateError(f"CNOT control and target are both {self.target}")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.control, self.target)


@dataclass(frozen=True)
class UniformlyControlledRotation:
    """Applies a rotation R(angles[k]) on ``target`` for control pattern k.

    k reads the control bits in the order of ``controls``, the first
    control being the most significant bit.
    """

    angles: tuple[float, ...]
    controls: tuple[int, ...]
    target: int

    AXIS = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        object.__setattr__(self, "controls", tuple(self.controls))
        if self.target in self.controls:
            raise InvalidGateError(f"target {self.target} is also a control")
        if len(set(self.controls)) != len(self.controls):
            raise InvalidGateError(f"repeated control in {self.controls}")
        if len(self.angles) != 2 ** len(self.controls):
            raise ArityError(
                f"{len(self.controls)} control(s) need {2 ** len(self.controls)} "
                f"angles, got {len(self.angles)}"
            )

    @property
    def qubits(self) -> tuple[int, ...]:
        return (*self.controls, self.target)

    def rotation(self, theta: float) -> np.ndarray:
        raise NotImplementedError


class UniformlyControlledRy(UniformlyControlledRotation):
    """Uniformly controlled Ry."""

    AXIS = "y"

    def rotation(self, theta: float) -> np.ndarray:
        return ry_matrix(theta)


class UniformlyControlledRz(UniformlyControlledRotation):
    """Uniformly controlled Rz."""

    AXIS = "z"

    def rotation(self, theta: float) -> np.ndarray:
        return rz_matrix(theta)


Gate = SingleQubitGate | CNOTGate | UniformlyControlledRy | UniformlyControlledRz

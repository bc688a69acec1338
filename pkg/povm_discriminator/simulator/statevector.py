"""Pure-function statevector engine.

Public operations take and return StateVector values. Internally every
gate acts on an amplitude tensor of shape ``[2] * n + [batch]`` so that
many states (or the columns of an identity matrix) are propagated in
one pass.
"""

import itertools
from typing import Iterable, Sequence

import numpy as np

from povm_discriminator.errors import (
    ArityError,
    InvalidGateError,
    NormalizationError,
    QubitIndexError,
    ShapeError,
)
from povm_discriminator.model.gates import (
    CNOTGate,
    Gate,
    SingleQubitGate,
    UniformlyControlledRotation,
    UniformlyControlledRy,
)
from povm_discriminator.model.state import OutcomeDistribution, StateVector


# Deviations of a marginal's sum below this are renormalized away.
RENORMALIZE_TOLERANCE = 1e-9


def _check_qubit(qubit: int, num_qubits: int) -> None:
    if not 0 <= qubit < num_qubits:
        raise QubitIndexError(f"qubit {qubit} outside register of {num_qubits}")


def _check_gate(gate: Gate, num_qubits: int) -> None:
    for qubit in gate.qubits:
        _check_qubit(qubit, num_qubits)


def _apply_matrix(tensor: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(tensor, axis, 0)
    out = np.tensordot(matrix, moved, axes=([1], [0]))
    return np.moveaxis(out, 0, axis)


def _apply_cnot(tensor: np.ndarray, control: int, target: int) -> np.ndarray:
    out = tensor.copy()
    index: list[slice | int] = [slice(None)] * tensor.ndim
    index[control] = 1
    axis = target if target < control else target - 1
    out[tuple(index)] = np.flip(tensor[tuple(index)], axis=axis)
    return out


def _apply_uniformly_controlled(
    tensor: np.ndarray, gate: UniformlyControlledRotation
) -> np.ndarray:
    out = tensor.copy()
    axis = gate.target - sum(1 for c in gate.controls if c < gate.target)
    patterns = itertools.product((0, 1), repeat=len(gate.controls))
    for angle, bits in zip(gate.angles, patterns):
        if angle == 0.0:
            continue
        index: list[slice | int] = [slice(None)] * tensor.ndim
        for control, bit in zip(gate.controls, bits):
            index[control] = bit
        block = tensor[tuple(index)]
        out[tuple(index)] = _apply_matrix(block, gate.rotation(angle), axis)
    return out


def apply_to_tensor(tensor: np.ndarray, gate: Gate) -> np.ndarray:
    """Apply ``gate`` to an amplitude tensor of shape [2]*n + [batch]."""
    if isinstance(gate, SingleQubitGate):
        return _apply_matrix(tensor, gate.matrix, gate.target)
    if isinstance(gate, CNOTGate):
        return _apply_cnot(tensor, gate.control, gate.target)
    if isinstance(gate, UniformlyControlledRotation):
        return _apply_uniformly_controlled(tensor, gate)
    raise InvalidGateError(f"unsupported gate type {type(gate).__name__}")


def apply_stacked_matrix(tensor: np.ndarray, matrices: np.ndarray, qubit: int) -> np.ndarray:
    """Apply ``matrices[k]`` to ``qubit`` of slice k of a [K] + [2]*n + [batch] tensor."""
    moved = np.moveaxis(tensor, qubit + 1, 1)
    out = np.einsum("kij,kj...->ki...", matrices, moved)
    return np.moveaxis(out, 1, qubit + 1)


def apply_stacked_cnot(tensor: np.ndarray, control: int, target: int) -> np.ndarray:
    """CNOT on every slice of a [K] + [2]*n + [batch] tensor."""
    return _apply_cnot(tensor, control + 1, target + 1)


def apply_stacked_uniformly_controlled(
    tensor: np.ndarray,
    rotations: np.ndarray,
    controls: Sequence[int],
    target: int,
) -> np.ndarray:
    """Uniformly controlled rotation with per-slice matrices.

    ``rotations`` has shape (K, 2**len(controls), 2, 2); pattern p reads the
    control bits with the first control as the most significant bit.
    """
    out = tensor.copy()
    qubit = target - sum(1 for c in controls if c < target)
    patterns = itertools.product((0, 1), repeat=len(controls))
    for p, bits in enumerate(patterns):
        index: list[slice | int] = [slice(None)] * tensor.ndim
        for control, bit in zip(controls, bits):
            index[control + 1] = bit
        out[tuple(index)] = apply_stacked_matrix(tensor[tuple(index)], rotations[:, p], qubit)
    return out


def run_batch(columns: np.ndarray, gates: Iterable[Gate], num_qubits: int) -> np.ndarray:
    """Propagate the columns of a (2**n, batch) array through ``gates``."""
    batch = columns.shape[1]
    tensor = np.asarray(columns, dtype=complex).reshape([2] * num_qubits + [batch])
    for gate in gates:
        _check_gate(gate, num_qubits)
        tensor = apply_to_tensor(tensor, gate)
    return tensor.reshape(2**num_qubits, batch)


def _evolve(state: StateVector, gate: Gate) -> StateVector:
    _check_gate(gate, state.num_qubits)
    column = state.amplitudes.reshape(-1, 1)
    tensor = apply_to_tensor(column.reshape([2] * state.num_qubits + [1]), gate)
    return StateVector(amplitudes=tensor.reshape(-1), num_qubits=state.num_qubits)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Return ``state`` with ``gate`` applied."""
    return _evolve(state, gate)


def apply_single_qubit_gate(
    state: StateVector, matrix: np.ndarray, target: int
) -> StateVector:
    """Apply a 2x2 unitary to ``target``."""
    _check_qubit(target, state.num_qubits)
    return _evolve(state, SingleQubitGate(matrix=matrix, target=target))


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Flip ``target`` on the basis states where ``control`` is 1."""
    return _evolve(state, CNOTGate(control=control, target=target))


def apply_uniformly_controlled_ry(
    state: StateVector,
    angles: Sequence[float],
    controls: Sequence[int],
    target: int,
) -> StateVector:
    """Apply Ry(angles[k]) to ``target`` on the subspace where the controls read k."""
    gate = UniformlyControlledRy(
        angles=tuple(angles), controls=tuple(controls), target=target
    )
    return _evolve(state, gate)


def sequence_unitary(gates: Iterable[Gate], num_qubits: int) -> np.ndarray:
    """Dense operator of a gate sequence (identity for an empty one)."""
    dim = 2**num_qubits
    return run_batch(np.eye(dim, dtype=complex), gates, num_qubits)


def marginal_probabilities(
    amplitudes: np.ndarray, num_qubits: int, qubits: Sequence[int]
) -> np.ndarray:
    """Born-rule marginals over ``qubits`` for a (2**n,) or (2**n, batch) array.

    Returns shape (2**len(qubits),) or (batch, 2**len(qubits)).
    """
    batched = amplitudes.ndim == 2
    batch = amplitudes.shape[1] if batched else 1
    density = np.abs(amplitudes.reshape([2] * num_qubits + [batch])) ** 2
    traced = [q for q in range(num_qubits) if q not in qubits]
    marginal = density.sum(axis=tuple(traced))
    # Remaining axes are the measured qubits in ascending order, then batch.
    kept = sorted(qubits)
    order = [kept.index(q) for q in qubits] + [len(kept)]
    marginal = np.transpose(marginal, order).reshape(2 ** len(qubits), batch).T
    return marginal if batched else marginal[0]


def _clean_distribution(probs: np.ndarray) -> np.ndarray:
    probs = np.clip(probs, 0.0, None)
    total = float(probs.sum())
    if abs(total - 1.0) > RENORMALIZE_TOLERANCE:
        raise NormalizationError(f"marginal sums to {total!r}")
    return probs / total


def measure_marginal(state: StateVector, qubits: Sequence[int]) -> OutcomeDistribution:
    """Exact outcome distribution of measuring ``qubits`` (state is untouched)."""
    qubits = tuple(qubits)
    if not qubits:
        raise ArityError("at least one qubit must be measured")
    if len(set(qubits)) != len(qubits):
        raise ArityError(f"repeated qubit in {qubits}")
    for qubit in qubits:
        _check_qubit(qubit, state.num_qubits)
    probs = marginal_probabilities(state.amplitudes, state.num_qubits, qubits)
    return OutcomeDistribution(probs=_clean_distribution(probs), qubits=qubits)


def fidelity(a: StateVector, b: StateVector) -> float:
    """Overlap magnitude |<a|b>|."""
    if a.dimension != b.dimension:
        raise ShapeError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes))))

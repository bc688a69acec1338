"""The parametrized four-outcome POVM circuit.

Register layout: qubit 0 is the first ancilla, qubit 1 the second
ancilla, qubits 2 and 3 carry the two-qubit input. Both ancillas start
in |0>. The mid-circuit measurement of the first ancilla is deferred:
everything it classically controlled is controlled by qubit 0 instead,
and both ancillas are read out at the end.

Stages, in order:

  u               general two-qubit unitary on the data
  first_ancilla   uniformly controlled Ry on qubit 0, controlled by the data
  w, phase, v     the data unitary selected by the first outcome, split as
                  V . D(q0) . W with D a uniformly controlled Rz on qubit 0
  second_ancilla  uniformly controlled Ry on qubit 1, controlled by (0, 2, 3)
"""

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from povm_discriminator.errors import ArityError, ShapeError
from povm_discriminator.model.ensemble import OUTCOME_LABELS
from povm_discriminator.model.gates import (
    CNOTGate,
    Gate,
    SingleQubitGate,
    UniformlyControlledRy,
    UniformlyControlledRz,
    euler_matrix,
    euler_stack,
    ry_matrix,
    ry_stack,
    rz_matrix,
    rz_stack,
)
from povm_discriminator.model.state import OutcomeDistribution, StateVector
from povm_discriminator.simulator.statevector import (
    apply_stacked_cnot,
    apply_stacked_matrix,
    apply_stacked_uniformly_controlled,
    run_batch,
    sequence_unitary,
)

NUM_QUBITS = 4
ANCILLA_QUBITS = (0, 1)
DATA_QUBITS = (2, 3)
DATA_DIM = 4


@dataclass(frozen=True)
class GateTemplate:
    """One slot of the fixed topology; angles come from ``param_indices``."""

    stage: str
    kind: str  # "euler", "rz", "ry", "cnot", "ucry", "ucrz"
    target: int
    controls: tuple[int, ...] = ()
    param_indices: tuple[int, ...] = ()

    def materialize(self, angles: np.ndarray) -> Gate:
        values = [float(angles[i]) for i in self.param_indices]
        if self.kind == "euler":
            return SingleQubitGate(matrix=euler_matrix(*values), target=self.target)
        if self.kind == "rz":
            return SingleQubitGate(matrix=rz_matrix(values[0]), target=self.target)
        if self.kind == "ry":
            return SingleQubitGate(matrix=ry_matrix(values[0]), target=self.target)
        if self.kind == "cnot":
            return CNOTGate(control=self.controls[0], target=self.target)
        if self.kind == "ucry":
            return UniformlyControlledRy(
                angles=tuple(values), controls=self.controls, target=self.target
            )
        if self.kind == "ucrz":
            return UniformlyControlledRz(
                angles=tuple(values), controls=self.controls, target=self.target
            )
        raise ValueError(f"unknown template kind {self.kind!r}")

    def apply_stacked(self, tensor: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Apply this slot to a [K] + [2]*n + [batch] tensor, slice k with ``rows[k]``."""
        values = rows[:, list(self.param_indices)]
        if self.kind == "cnot":
            return apply_stacked_cnot(tensor, self.controls[0], self.target)
        if self.kind == "euler":
            return apply_stacked_matrix(tensor, euler_stack(*values.T), self.target)
        if self.kind == "rz":
            return apply_stacked_matrix(tensor, rz_stack(values[:, 0]), self.target)
        if self.kind == "ry":
            return apply_stacked_matrix(tensor, ry_stack(values[:, 0]), self.target)
        if self.kind in ("ucry", "ucrz"):
            rotations = ry_stack(values) if self.kind == "ucry" else rz_stack(values)
            return apply_stacked_uniformly_controlled(tensor, rotations, self.controls, self.target)
        raise ValueError(f"unknown template kind {self.kind!r}")


class _Builder:
    def __init__(self) -> None:
        self.templates: list[GateTemplate] = []
        self.next_index = 0

    def _take(self, count: int) -> tuple[int, ...]:
        indices = tuple(range(self.next_index, self.next_index + count))
        self.next_index += count
        return indices

    def add(self, stage: str, kind: str, target: int, controls: tuple[int, ...] = (), count: int = 0) -> None:
        self.templates.append(
            GateTemplate(stage, kind, target, controls, self._take(count))
        )

    def two_qubit_block(self, stage: str, a: int, b: int) -> None:
        """Three-CNOT universal two-qubit block with 15 angles."""
        self.add(stage, "euler", a, count=3)
        self.add(stage, "euler", b, count=3)
        self.add(stage, "cnot", a, (b,))
        self.add(stage, "rz", a, count=1)
        self.add(stage, "ry", b, count=1)
        self.add(stage, "cnot", b, (a,))
        self.add(stage, "ry", b, count=1)
        self.add(stage, "cnot", a, (b,))
        self.add(stage, "euler", a, count=3)
        self.add(stage, "euler", b, count=3)


def _build_topology() -> tuple[tuple[GateTemplate, ...], int]:
    builder = _Builder()
    a, b = DATA_QUBITS
    builder.two_qubit_block("u", a, b)
    builder.add("first_ancilla", "ucry", 0, DATA_QUBITS, count=4)
    builder.two_qubit_block("w", a, b)
    builder.add("phase", "ucrz", 0, DATA_QUBITS, count=4)
    builder.two_qubit_block("v", a, b)
    builder.add("second_ancilla", "ucry", 1, (0, *DATA_QUBITS), count=8)
    return tuple(builder.templates), builder.next_index


TOPOLOGY, NUM_PARAMS = _build_topology()


@dataclass(frozen=True, eq=False)
class CircuitParams:
    """Flat vector of rotation angles (radians), one per topology slot."""

    angles: np.ndarray

    def __post_init__(self) -> None:
        angles = np.array(self.angles, dtype=float).reshape(-1)
        if angles.size != NUM_PARAMS:
            raise ArityError(f"expected {NUM_PARAMS} angles, got {angles.size}")
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)


@dataclass(frozen=True, eq=False)
class DiscriminatorCircuit:
    """An immutable gate sequence on 2 ancilla + 2 data qubits."""

    gates: tuple[Gate, ...]
    params: CircuitParams | None = None
    stages: tuple[str, ...] = field(default=())
    ancilla_qubits: tuple[int, ...] = ANCILLA_QUBITS
    data_qubits: tuple[int, ...] = DATA_QUBITS

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.stages and len(self.stages) != len(self.gates):
            raise ShapeError("one stage name per gate is required")

    def stage_gates(self, stage: str) -> tuple[Gate, ...]:
        return tuple(g for g, s in zip(self.gates, self.stages) if s == stage)


def build_discriminator_circuit(params: CircuitParams | Sequence[float] | np.ndarray) -> DiscriminatorCircuit:
    """Materialize the fixed topology with the given angles."""
    if not isinstance(params, CircuitParams):
        params = CircuitParams(angles=np.asarray(params, dtype=float))
    gates = tuple(t.materialize(params.angles) for t in TOPOLOGY)
    return DiscriminatorCircuit(
        gates=gates,
        params=params,
        stages=tuple(t.stage for t in TOPOLOGY),
    )


def circuit_unitary(circuit: DiscriminatorCircuit) -> np.ndarray:
    """Dense 16x16 operator of the whole circuit."""
    return sequence_unitary(circuit.gates, NUM_QUBITS)


def input_isometry(circuit: DiscriminatorCircuit) -> np.ndarray:
    """Columns are the circuit applied to |00>|j>, j = 0..3 (a 16x4 isometry)."""
    columns = np.zeros((2**NUM_QUBITS, DATA_DIM), dtype=complex)
    columns[np.arange(DATA_DIM), np.arange(DATA_DIM)] = 1.0
    return run_batch(columns, circuit.gates, NUM_QUBITS)


def isometry_stack(angle_rows: np.ndarray) -> np.ndarray:
    """Input isometries (K x 16 x 4) for K angle vectors, propagated together.

    Equal to ``input_isometry(build_discriminator_circuit(row))`` per row,
    without building gate objects.
    """
    rows = np.atleast_2d(np.asarray(angle_rows, dtype=float))
    if rows.shape[1] != NUM_PARAMS:
        raise ArityError(f"expected {NUM_PARAMS} angles per row, got {rows.shape[1]}")
    count = rows.shape[0]
    columns = np.zeros((count, 2**NUM_QUBITS, DATA_DIM), dtype=complex)
    columns[:, np.arange(DATA_DIM), np.arange(DATA_DIM)] = 1.0
    tensor = columns.reshape([count] + [2] * NUM_QUBITS + [DATA_DIM])
    for template in TOPOLOGY:
        tensor = template.apply_stacked(tensor, rows)
    return tensor.reshape(count, 2**NUM_QUBITS, DATA_DIM)


def outcome_table_from_isometry(isometry: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    """Outcome probabilities (B x 4, OUTCOME_LABELS order) for B input rows.

    A stack of isometries (K x 16 x 4) gives a K x B x 4 table.
    """
    inputs = np.atleast_2d(inputs)
    if inputs.shape[1] != DATA_DIM:
        raise ShapeError(f"inputs must have {DATA_DIM} amplitudes, got {inputs.shape[1]}")
    outputs = isometry @ inputs.T
    # Row index is 4 * (2 b0 + b1) + data, so ancilla outcomes are blocks of 4 rows.
    density = np.abs(outputs.reshape(*outputs.shape[:-2], len(OUTCOME_LABELS), DATA_DIM, -1)) ** 2
    return np.swapaxes(density.sum(axis=-2), -1, -2)


def outcome_probability_table(circuit: DiscriminatorCircuit, inputs: np.ndarray) -> np.ndarray:
    """Batched exact outcome probabilities for rows of 2-qubit amplitudes."""
    return outcome_table_from_isometry(input_isometry(circuit), inputs)


def outcome_probabilities(circuit: DiscriminatorCircuit, state: StateVector) -> OutcomeDistribution:
    """Exact distribution of the four outcomes m00, m10, m01, m11 for one input."""
    if state.num_qubits != len(DATA_QUBITS):
        raise ShapeError(f"input must be a 2-qubit state, got {state.num_qubits} qubit(s)")
    probs = outcome_probability_table(circuit, state.amplitudes)[0]
    probs = np.clip(probs, 0.0, None)
    return OutcomeDistribution(
        probs=probs / probs.sum(), qubits=ANCILLA_QUBITS, labels=OUTCOME_LABELS
    )


def povm_effects(circuit: DiscriminatorCircuit) -> dict[str, np.ndarray]:
    """The effects E_m = K_m^dagger K_m implied on the data register."""
    isometry = input_isometry(circuit)
    effects = {}
    for k, label in enumerate(OUTCOME_LABELS):
        kraus = isometry[k * DATA_DIM:(k + 1) * DATA_DIM, :]
        effects[label] = kraus.conj().T @ kraus
    return effects


def describe_topology() -> list[dict[str, Any]]:
    """Ordered records of the topology: stage, kind, qubits, parameter indices."""
    return [
        {
            "index": i,
            "stage": t.stage,
            "kind": t.kind,
            "target": t.target,
            "controls": list(t.controls),
            "params": list(t.param_indices),
        }
        for i, t in enumerate(TOPOLOGY)
    ]

"""Lowering of uniformly controlled rotations to CNOT + single-qubit gates.

A rotation multiplexed over k controls becomes an alternating cascade of
2**k plain rotations and 2**k CNOTs. The recursion splits the angle list
into its even and odd halves with respect to the first control.
"""

import numpy as np

from povm_discriminator.circuit.topology import DiscriminatorCircuit
from povm_discriminator.model.gates import (
    CNOTGate,
    Gate,
    SingleQubitGate,
    UniformlyControlledRotation,
    ry_matrix,
    rz_matrix,
)


def _rotation(axis: str, angle: float, target: int) -> SingleQubitGate:
    matrix = ry_matrix(angle) if axis == "y" else rz_matrix(angle)
    return SingleQubitGate(matrix=matrix, target=target)


def _lower(
    axis: str,
    angles: np.ndarray,
    controls: tuple[int, ...],
    target: int,
    last_cnot: bool,
) -> list[Gate]:
    if not controls:
        return [_rotation(axis, float(angles[0]), target)]
    half = angles.size // 2
    first = (angles[:half] + angles[half:]) / 2.0
    second = (angles[:half] - angles[half:]) / 2.0
    rest = controls[1:]
    sequence = _lower(axis, first, rest, target, last_cnot=False)
    sequence.append(CNOTGate(control=controls[0], target=target))
    sequence.extend(reversed(_lower(axis, second, rest, target, last_cnot=False)))
    if last_cnot:
        sequence.append(CNOTGate(control=controls[0], target=target))
    return sequence


def lower_uniformly_controlled(gate: UniformlyControlledRotation) -> list[Gate]:
    """Equivalent CNOT + rotation sequence for a uniformly controlled Ry or Rz."""
    angles = np.asarray(gate.angles, dtype=float)
    return _lower(gate.AXIS, angles, tuple(gate.controls), gate.target, last_cnot=True)


def lowered_gate_sequence(circuit: DiscriminatorCircuit) -> list[Gate]:
    """The whole circuit as CNOT and single-qubit gates only."""
    lowered: list[Gate] = []
    for gate in circuit.gates:
        if isinstance(gate, UniformlyControlledRotation):
            lowered.extend(lower_uniformly_controlled(gate))
        else:
            lowered.append(gate)
    return lowered

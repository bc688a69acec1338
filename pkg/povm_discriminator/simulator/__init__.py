"""Statevector simulation engine."""

from povm_discriminator.simulator.statevector import (
    apply_cnot,
    apply_gate,
    apply_single_qubit_gate,
    apply_uniformly_controlled_ry,
    fidelity,
    measure_marginal,
    sequence_unitary,
)

__all__ = [
    "apply_cnot",
    "apply_gate",
    "apply_single_qubit_gate",
    "apply_uniformly_controlled_ry",
    "fidelity",
    "measure_marginal",
    "sequence_unitary",
]

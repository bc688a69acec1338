"""The parametrized discriminator circuit and its exact outcome statistics."""

from povm_discriminator.circuit.lowering import (
    lower_uniformly_controlled,
    lowered_gate_sequence,
)
from povm_discriminator.circuit.topology import (
    ANCILLA_QUBITS,
    DATA_QUBITS,
    NUM_PARAMS,
    NUM_QUBITS,
    TOPOLOGY,
    CircuitParams,
    DiscriminatorCircuit,
    GateTemplate,
    build_discriminator_circuit,
    circuit_unitary,
    describe_topology,
    input_isometry,
    isometry_stack,
    outcome_probabilities,
    outcome_probability_table,
    outcome_table_from_isometry,
    povm_effects,
)

__all__ = [
    "ANCILLA_QUBITS",
    "DATA_QUBITS",
    "NUM_PARAMS",
    "NUM_QUBITS",
    "TOPOLOGY",
    "CircuitParams",
    "DiscriminatorCircuit",
    "GateTemplate",
    "build_discriminator_circuit",
    "circuit_unitary",
    "describe_topology",
    "input_isometry",
    "isometry_stack",
    "lower_uniformly_controlled",
    "lowered_gate_sequence",
    "outcome_probabilities",
    "outcome_probability_table",
    "outcome_table_from_isometry",
    "povm_effects",
]

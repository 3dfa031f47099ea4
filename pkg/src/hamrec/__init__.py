"""Hamiltonian recognition with quantum signal processing."""

from .protocols import (
    XYZ,
    XZ,
    HypothesisSet,
    ProtocolCircuit,
    average_success,
    build_binary_circuit,
    build_ternary_circuit,
    error_polynomial,
    fejer_form,
    sample_shots,
    success_variance,
)
from .qsp_synthesis import PhaseSequence, synthesize
from .quantum_core import BlochHamiltonian, DomainError
from .tester_sdp import (
    binary_certificate,
    circuit_to_tester,
    general_axis_sweep,
    performance_operator,
    solve_recognition_sdp,
    ternary_certificate,
)

__version__ = "0.1.0"

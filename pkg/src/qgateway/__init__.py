"""Self-contained quantum-access gateway.

Programs (OpenQASM 2.0 subset or Pauli-rotation format) go in over HTTP or
the CLI; sampled measurement counts come back, with embedded identity, durable
job storage, and resource telemetry around the pipeline.
"""

from .circuit import Circuit, GateOp, bind_parameters, circuit_stats, emit_qasm
from .compiler import compile_program, lower_pauli_term, peephole_optimize
from .config import ServiceConfig, load_config
from .pauli import PauliProgram, PauliTerm, format_pauli_program, parse_pauli_program
from .qasm import parse_qasm
from .simulator import (
    NoiseSpec,
    ResultObject,
    execute,
    run_statevector,
    sample_counts,
    unitary_of,
)

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "GateOp",
    "NoiseSpec",
    "PauliProgram",
    "PauliTerm",
    "ResultObject",
    "ServiceConfig",
    "bind_parameters",
    "circuit_stats",
    "compile_program",
    "emit_qasm",
    "execute",
    "format_pauli_program",
    "load_config",
    "lower_pauli_term",
    "parse_pauli_program",
    "parse_qasm",
    "peephole_optimize",
    "run_statevector",
    "sample_counts",
    "unitary_of",
]

"""Shared submit pipeline: source text to a fully bound circuit.

Pauli programs go parse -> compile -> peephole; QASM goes parse. Both then
bind parameters. The lowered QASM for Pauli submissions is emitted from the
bound circuit because Pauli parameter names (bare integers are common) are
not valid QASM identifiers before binding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .circuit import Circuit, bind_parameters, emit_qasm
from .compiler import compile_program, peephole_optimize
from .errors import UnboundParameters
from .pauli import parse_pauli_program, validate
from .qasm import parse_qasm

FORMATS = ("qasm", "pauli")


@dataclass(frozen=True)
class PreparedProgram:
    circuit: Circuit  # fully bound
    generated_qasm: str | None
    warnings: tuple[str, ...]


def prepare(
    fmt: str,
    source: str,
    parameters: Mapping[str, float] | Sequence[float] | None,
) -> PreparedProgram:
    """Parse, lower if needed, and bind; raises positioned/binding errors."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, not {fmt!r}")
    warnings: tuple[str, ...] = ()
    if fmt == "pauli":
        program = parse_pauli_program(source)
        warnings = tuple(
            f"{w.kind}: line {w.line}: {w.message}" for w in validate(program)
        )
        circuit = peephole_optimize(compile_program(program))
    else:
        circuit = parse_qasm(source)
    if parameters is not None:
        circuit = bind_parameters(circuit, parameters)
    if circuit.free_params:
        names = ", ".join(circuit.free_params)
        raise UnboundParameters(f"unbound parameter(s): {names}")
    generated = emit_qasm(circuit) if fmt == "pauli" else None
    return PreparedProgram(circuit=circuit, generated_qasm=generated, warnings=warnings)

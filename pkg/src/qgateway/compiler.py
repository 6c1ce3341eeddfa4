"""Pauli-program lowering and peephole cleanup.

Each term (P, c, theta) lowers to gates implementing exp(-i*(c*theta)/2 * P):
per-qubit basis changes into Z, a CX star ladder folding parity into the
highest-index active qubit, one rz there, then the mirror image. A single Z
term therefore reduces exactly to rz(c*theta). Global phase is unobservable
and all equivalence checks are modulo global phase.
"""

from __future__ import annotations

from .circuit import BinOp, Circuit, GateOp, Param, num
from .errors import UnboundParameters
from .pauli import PauliProgram, PauliTerm

# basis-change recipes into/out of the Z basis
_BEFORE = {"X": ("h",), "Y": ("sdg", "h"), "Z": ()}
_AFTER = {"X": ("h",), "Y": ("h", "s"), "Z": ()}


def lower_pauli_term(term: PauliTerm, n_qubits: int) -> tuple[GateOp, ...]:
    """Gate sequence for one term; the all-identity term yields nothing."""
    if len(term.operators) != n_qubits:
        raise ValueError(f"term width {len(term.operators)} != {n_qubits}")
    active = term.active_qubits()
    if not active:
        return ()
    target = active[-1]
    if term.parameter is not None:
        angle = BinOp("*", num(term.coefficient), Param(term.parameter))
    else:
        angle = num(term.coefficient)
    ops: list[GateOp] = []
    for q in active:
        for kind in _BEFORE[term.operators[q]]:
            ops.append(GateOp(kind, (q,)))
    for q in active[:-1]:
        ops.append(GateOp("cx", (q, target)))
    ops.append(GateOp("rz", (target,), (), (angle,)))
    for q in reversed(active[:-1]):
        ops.append(GateOp("cx", (q, target)))
    for q in reversed(active):
        for kind in _AFTER[term.operators[q]]:
            ops.append(GateOp(kind, (q,)))
    return tuple(ops)


def compile_program(program: PauliProgram) -> Circuit:
    """Lower terms in source order and append a terminal full measurement."""
    ops: list[GateOp] = []
    for term in program.terms:
        ops.extend(lower_pauli_term(term, program.n_qubits))
    for q in range(program.n_qubits):
        ops.append(GateOp("measure", (q,), (q,)))
    return Circuit(program.n_qubits, program.n_qubits, tuple(ops))


_INVERSE_PAIRS = {
    "h": "h",
    "s": "sdg",
    "sdg": "s",
    "t": "tdg",
    "tdg": "t",
    "x": "x",
    "y": "y",
    "z": "z",
    "cx": "cx",
}


def _merge_rz(a: GateOp, b: GateOp) -> GateOp:
    expr_a, expr_b = a.angles[0], b.angles[0]
    try:
        folded = expr_a.evaluate({}) + expr_b.evaluate({})
    except UnboundParameters:
        return GateOp("rz", a.qubits, (), (BinOp("+", expr_a, expr_b),))
    return GateOp("rz", a.qubits, (), (num(folded),))


def peephole_optimize(circuit: Circuit) -> Circuit:
    """Cancel adjacent inverse pairs and merge adjacent rz until fixpoint.

    Two ops are adjacent on their wires when nothing between them touches any
    of those wires; measurements and barriers on a wire block motion like any
    other op. The result never has more gates and preserves the
    pre-measurement unitary up to global phase.
    """
    ops = list(circuit.ops)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(ops):
            op = ops[i]
            if op.kind not in _INVERSE_PAIRS and op.kind != "rz":
                i += 1
                continue
            wires = set(op.wires())
            partner = None
            for j in range(i + 1, len(ops)):
                if wires & set(ops[j].wires()):
                    partner = j
                    break
            if partner is None:
                i += 1
                continue
            other = ops[partner]
            if op.kind == "rz" and other.kind == "rz" and other.qubits == op.qubits:
                ops[i] = _merge_rz(op, other)
                del ops[partner]
                changed = True
                continue
            if _INVERSE_PAIRS.get(op.kind) == other.kind and other.qubits == op.qubits:
                del ops[partner]
                del ops[i]
                changed = True
                continue
            i += 1
    return Circuit(circuit.n_qubits, circuit.n_clbits, tuple(ops))

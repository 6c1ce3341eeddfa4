"""Gate-level hardware-independent circuit IR.

A ``Circuit`` is an ordered list of ``GateOp`` over a flat qubit/clbit index
space. Rotation angles are small expression trees (``AngleExpr``) so circuits
can stay symbolic until parameters are bound. Qubit 0 is the least significant
bit of a basis-state index; counts strings put clbit 0 leftmost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, Sequence, Union

from .errors import ArityMismatch, UnboundParameters, UnknownParameter

# Angle expressions


class AngleExpr:
    """Base for angle expression nodes; subclasses are frozen dataclasses."""

    def parameters(self) -> Iterator[str]:
        return iter(())

    def evaluate(self, env: Mapping[str, float]) -> float:
        raise NotImplementedError

    def substitute(self, env: Mapping[str, float]) -> "AngleExpr":
        return self

    def render(self) -> str:
        raise NotImplementedError

    # precedence for parenthesis-minimal rendering: atoms 4, unary 3, */ 2, +- 1
    _prec = 4


@dataclass(frozen=True)
class Num(AngleExpr):
    value: float

    def evaluate(self, env):
        return self.value

    def render(self):
        return repr(self.value)


@dataclass(frozen=True)
class Pi(AngleExpr):
    def evaluate(self, env):
        return math.pi

    def render(self):
        return "pi"


@dataclass(frozen=True)
class Param(AngleExpr):
    name: str

    def parameters(self):
        yield self.name

    def evaluate(self, env):
        if self.name not in env:
            raise UnboundParameters(f"parameter {self.name!r} has no bound value")
        return float(env[self.name])

    def substitute(self, env):
        if self.name in env:
            return num(float(env[self.name]))
        return self

    def render(self):
        return self.name


@dataclass(frozen=True)
class Neg(AngleExpr):
    operand: AngleExpr
    _prec = 3

    def parameters(self):
        return self.operand.parameters()

    def evaluate(self, env):
        return -self.operand.evaluate(env)

    def substitute(self, env):
        return Neg(self.operand.substitute(env))

    def render(self):
        inner = self.operand.render()
        if self.operand._prec < 4:
            inner = f"({inner})"
        return f"-{inner}"


_OPS = {
    "+": (1, lambda a, b: a + b),
    "-": (1, lambda a, b: a - b),
    "*": (2, lambda a, b: a * b),
    "/": (2, lambda a, b: a / b),
}


@dataclass(frozen=True)
class BinOp(AngleExpr):
    op: str
    left: AngleExpr
    right: AngleExpr

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValueError(f"unknown operator {self.op!r}")

    @property
    def _prec(self):  # type: ignore[override]
        return _OPS[self.op][0]

    def parameters(self):
        yield from self.left.parameters()
        yield from self.right.parameters()

    def evaluate(self, env):
        return _OPS[self.op][1](self.left.evaluate(env), self.right.evaluate(env))

    def substitute(self, env):
        return BinOp(self.op, self.left.substitute(env), self.right.substitute(env))

    def render(self):
        prec = self._prec
        left = self.left.render()
        if self.left._prec < prec:
            left = f"({left})"
        right = self.right.render()
        # parsing is left-associative, so any equal-precedence right child
        # needs parens to re-parse into the same tree
        if self.right._prec <= prec:
            right = f"({right})"
        return f"{left}{self.op}{right}"


def num(value: float) -> AngleExpr:
    """Literal node; negative values become ``Neg`` so rendering re-parses to an equal tree."""
    if value < 0 or math.copysign(1.0, value) < 0:
        return Neg(Num(-value))
    return Num(value)


# Gate ops and circuits

# kind -> (n_qubits, n_angles); measure and barrier are validated separately
GATE_SPECS = {
    "h": (1, 0),
    "x": (1, 0),
    "y": (1, 0),
    "z": (1, 0),
    "s": (1, 0),
    "sdg": (1, 0),
    "t": (1, 0),
    "tdg": (1, 0),
    "rx": (1, 1),
    "ry": (1, 1),
    "rz": (1, 1),
    "u1": (1, 1),
    "u2": (1, 2),
    "u3": (1, 3),
    "cx": (2, 0),
}

GATE_KINDS = frozenset(GATE_SPECS) | {"measure", "barrier"}


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple[int, ...]
    clbits: tuple[int, ...] = ()
    angles: tuple[AngleExpr, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "clbits", tuple(self.clbits))
        object.__setattr__(self, "angles", tuple(self.angles))
        if any(q < 0 for q in self.qubits) or any(c < 0 for c in self.clbits):
            raise ValueError(f"{self.kind}: negative wire index")
        if self.kind == "measure":
            if len(self.qubits) != 1 or len(self.clbits) != 1 or self.angles:
                raise ValueError("measure pairs exactly one qubit with one clbit")
            return
        if self.kind == "barrier":
            if not self.qubits or self.clbits or self.angles:
                raise ValueError("barrier takes one or more qubits and nothing else")
            return
        spec = GATE_SPECS.get(self.kind)
        if spec is None:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        n_qubits, n_angles = spec
        if len(self.qubits) != n_qubits:
            raise ValueError(f"{self.kind} takes {n_qubits} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind}: qubit arguments must be distinct")
        if self.clbits:
            raise ValueError(f"{self.kind} takes no classical bits")
        if len(self.angles) != n_angles:
            raise ValueError(f"{self.kind} takes {n_angles} angle(s), got {len(self.angles)}")

    def wires(self) -> tuple:
        """Hashable qubit/clbit identity used for dependency analysis."""
        return tuple(("q", q) for q in self.qubits) + tuple(("c", c) for c in self.clbits)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    n_clbits: int = 0
    ops: tuple[GateOp, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if self.n_qubits < 0 or self.n_clbits < 0:
            raise ValueError("register sizes must be non-negative")
        for op in self.ops:
            if any(q >= self.n_qubits for q in op.qubits):
                raise ValueError(f"{op.kind} addresses qubit >= {self.n_qubits}")
            if any(c >= self.n_clbits for c in op.clbits):
                raise ValueError(f"{op.kind} addresses clbit >= {self.n_clbits}")

    @cached_property
    def free_params(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for op in self.ops:
            for expr in op.angles:
                for name in expr.parameters():
                    seen.setdefault(name, None)
        return tuple(seen)


def bind_parameters(
    circuit: Circuit, bindings: Mapping[str, float] | Sequence[float]
) -> Circuit:
    """Substitute parameter values; named mapping or positional sequence.

    Positional values are assigned to ``free_params`` in order of first
    appearance. Binding is substitution only; expressions are evaluated at
    execution time.
    """
    free = circuit.free_params
    if isinstance(bindings, Mapping):
        unknown = [name for name in bindings if name not in free]
        if unknown:
            raise UnknownParameter(f"no free parameter named {unknown[0]!r}")
        env = {name: float(value) for name, value in bindings.items()}
    else:
        values = list(bindings)
        if len(values) != len(free):
            raise ArityMismatch(
                f"{len(values)} positional value(s) for {len(free)} free parameter(s)"
            )
        env = {name: float(value) for name, value in zip(free, values)}
    if not env:
        return circuit
    ops = tuple(
        GateOp(op.kind, op.qubits, op.clbits, tuple(a.substitute(env) for a in op.angles))
        for op in circuit.ops
    )
    return Circuit(circuit.n_qubits, circuit.n_clbits, ops)


def circuit_stats(circuit: Circuit) -> dict:
    """Size metadata: depth is the longest chain of ops sharing a wire.

    Barriers order their wires but add no depth and are left out of
    ``gate_counts``.
    """
    frontier: dict = {}
    depth = 0
    counts: dict[str, int] = {}
    for op in circuit.ops:
        level = max((frontier.get(w, 0) for w in op.wires()), default=0)
        if op.kind != "barrier":
            level += 1
            counts[op.kind] = counts.get(op.kind, 0) + 1
        for w in op.wires():
            frontier[w] = level
        depth = max(depth, level)
    return {
        "n_qubits": circuit.n_qubits,
        "n_clbits": circuit.n_clbits,
        "depth": depth,
        "gate_counts": counts,
    }


def emit_qasm(circuit: Circuit) -> str:
    """Serialize to the OpenQASM 2.0 subset; re-parsing yields an equal circuit."""
    lines = ['OPENQASM 2.0;', 'include "qelib1.inc";']
    if circuit.n_qubits:
        lines.append(f"qreg q[{circuit.n_qubits}];")
    if circuit.n_clbits:
        lines.append(f"creg c[{circuit.n_clbits}];")
    for op in circuit.ops:
        if op.kind == "measure":
            lines.append(f"measure q[{op.qubits[0]}] -> c[{op.clbits[0]}];")
        elif op.kind == "barrier":
            args = ",".join(f"q[{q}]" for q in op.qubits)
            lines.append(f"barrier {args};")
        elif op.angles:
            angles = ",".join(a.render() for a in op.angles)
            args = ",".join(f"q[{q}]" for q in op.qubits)
            lines.append(f"{op.kind}({angles}) {args};")
        else:
            args = ",".join(f"q[{q}]" for q in op.qubits)
            lines.append(f"{op.kind} {args};")
    return "".join(line + "\n" for line in lines)

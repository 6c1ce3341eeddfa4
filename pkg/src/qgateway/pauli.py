"""Line-oriented Pauli-rotation program format.

One rotation term per line::

    IIXY 1. 1

Columns: an operator string over {I, X, Y, Z} where the leftmost character
addresses qubit 0, a real coefficient, and an optional parameter name.
``#`` starts a comment; blank lines are skipped. Several terms may share a
parameter name, and a term without one rotates by its literal coefficient.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import (
    InconsistentWidth,
    InvalidOperatorChar,
    MalformedCoefficient,
    PauliSyntaxError,
)

_PAULI_CHARS = frozenset("IXYZ")
_COEFF_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")
_PARAM_RE = re.compile(r"[A-Za-z0-9_]+\Z")
_TOKEN_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class PauliTerm:
    """One rotation term; ``line`` remembers the source line for diagnostics."""

    operators: str
    coefficient: float
    parameter: str | None = None
    line: int = field(default=0, compare=False)

    def __post_init__(self):
        if not self.operators or not set(self.operators) <= _PAULI_CHARS:
            raise ValueError(f"operator string {self.operators!r} must be non-empty over I/X/Y/Z")
        if not math.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")

    def active_qubits(self) -> list[int]:
        """Indices whose operator is not the identity."""
        return [i for i, op in enumerate(self.operators) if op != "I"]

    def is_identity(self) -> bool:
        return not self.active_qubits()


@dataclass(frozen=True)
class PauliProgram:
    terms: tuple[PauliTerm, ...]
    n_qubits: int

    def __post_init__(self):
        for term in self.terms:
            if len(term.operators) != self.n_qubits:
                raise ValueError(
                    f"term width {len(term.operators)} != program width {self.n_qubits}"
                )


@dataclass(frozen=True)
class ProgramWarning:
    kind: str  # "IdentityTerm" | "ZeroCoefficient"
    line: int
    message: str

    def __str__(self) -> str:
        return f"{self.kind} (line {self.line}): {self.message}"


def parse_pauli_program(text: str) -> PauliProgram:
    """Parse program text into a ``PauliProgram``.

    The empty program is legal and yields zero terms on zero qubits. All
    malformed inputs raise exactly one positioned error.
    """
    terms: list[PauliTerm] = []
    width: int | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        hash_at = raw.find("#")
        line = raw if hash_at < 0 else raw[:hash_at]
        tokens = [(m.group(), m.start() + 1) for m in _TOKEN_RE.finditer(line)]
        if not tokens:
            continue

        ops, ops_col = tokens[0]
        for offset, char in enumerate(ops):
            if char not in _PAULI_CHARS:
                raise InvalidOperatorChar(
                    f"operator character {char!r} is not one of I/X/Y/Z", lineno, ops_col + offset
                )
        if width is None:
            width = len(ops)
        elif len(ops) != width:
            raise InconsistentWidth(
                f"operator string has {len(ops)} characters, expected {width}", lineno, ops_col
            )

        if len(tokens) < 2:
            raise MalformedCoefficient(
                "missing coefficient column", lineno, ops_col + len(ops) + 1
            )
        coeff_text, coeff_col = tokens[1]
        if not _COEFF_RE.match(coeff_text):
            raise MalformedCoefficient(
                f"{coeff_text!r} is not a numeric coefficient", lineno, coeff_col
            )
        coefficient = float(coeff_text)

        parameter = None
        if len(tokens) >= 3:
            param_text, param_col = tokens[2]
            if not _PARAM_RE.match(param_text):
                raise PauliSyntaxError(
                    f"parameter name {param_text!r} must match [A-Za-z0-9_]+", lineno, param_col
                )
            parameter = param_text
        if len(tokens) > 3:
            extra, extra_col = tokens[3]
            raise PauliSyntaxError(f"unexpected trailing token {extra!r}", lineno, extra_col)

        terms.append(PauliTerm(ops, coefficient, parameter, line=lineno))

    return PauliProgram(tuple(terms), width if width is not None else 0)


def validate(program: PauliProgram) -> list[ProgramWarning]:
    """Non-fatal lint: identity terms compile away, zero coefficients rotate by nothing."""
    warnings = []
    for term in program.terms:
        if program.n_qubits and term.is_identity():
            warnings.append(
                ProgramWarning(
                    "IdentityTerm", term.line, "all-identity term contributes only a global phase"
                )
            )
        if term.coefficient == 0.0:
            warnings.append(
                ProgramWarning("ZeroCoefficient", term.line, "term has coefficient 0")
            )
    return warnings


def parameters_of(program: PauliProgram) -> list[str]:
    """Distinct parameter names in order of first appearance."""
    seen: dict[str, None] = {}
    for term in program.terms:
        if term.parameter is not None and term.parameter not in seen:
            seen[term.parameter] = None
    return list(seen)


def format_pauli_program(program: PauliProgram) -> str:
    """Canonical reprint: one term per line, re-parsing yields an equal program."""
    lines = []
    for term in program.terms:
        columns = [term.operators, repr(term.coefficient)]
        if term.parameter is not None:
            columns.append(term.parameter)
        lines.append(" ".join(columns))
    return "".join(line + "\n" for line in lines)

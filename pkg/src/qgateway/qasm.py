"""OpenQASM 2.0 subset parser.

Accepts the header, ``include "qelib1.inc"``, register declarations, the
supported gate set, ``measure`` and ``barrier``. Registers are flattened into
one qubit and one clbit index space in declaration order. Bare identifiers in
angle expressions become free parameters (OpenQASM 2.0 itself has no parameter
syntax; this is the minimal extension that lets uploaded circuits stay
symbolic). ``gate``, ``opaque``, ``if`` and ``reset`` are out of the subset.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .circuit import GATE_SPECS, AngleExpr, BinOp, Circuit, GateOp, Neg, Num, Param, Pi
from .errors import IndexOutOfRange, QasmSyntaxError, UnknownGate, UnsupportedFeature

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r]+)
    | (?P<comment>//[^\n]*)
    | (?P<newline>\n)
    | (?P<num>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)
    | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<string>"[^"\n]*")
    | (?P<arrow>->)
    | (?P<sym>==|[;,()\[\]{}+\-*/])
    """,
    re.VERBOSE,
)

_UNSUPPORTED = {
    "gate": "custom gate definitions",
    "opaque": "opaque gate declarations",
    "if": "classical control flow",
    "reset": "qubit resets",
}


@dataclass(frozen=True)
class _Token:
    kind: str  # num | id | string | sym (arrow folded into sym)
    text: str
    line: int
    column: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise QasmSyntaxError(
                f"unexpected character {source[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            text = m.group()
            col = m.start() - line_start + 1
            if kind == "arrow":
                kind = "sym"
            tokens.append(_Token(kind, text, line, col))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.qregs: dict[str, tuple[int, int]] = {}  # name -> (offset, size)
        self.cregs: dict[str, tuple[int, int]] = {}
        self.n_qubits = 0
        self.n_clbits = 0
        self.ops: list[GateOp] = []

    # token plumbing

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self, context: str) -> _Token:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            col = last.column + len(last.text) if last else 1
            raise QasmSyntaxError(f"unexpected end of input, expected {context}", line, col)
        self.pos += 1
        return tok

    def _expect(self, text: str) -> _Token:
        tok = self._next(f"{text!r}")
        if tok.text != text:
            raise QasmSyntaxError(
                f"expected {text!r}, found {tok.text!r}", tok.line, tok.column
            )
        return tok

    def _expect_kind(self, kind: str, context: str) -> _Token:
        tok = self._next(context)
        if tok.kind != kind:
            raise QasmSyntaxError(
                f"expected {context}, found {tok.text!r}", tok.line, tok.column
            )
        return tok

    # grammar

    def parse(self) -> Circuit:
        tok = self._next("'OPENQASM'")
        if tok.text != "OPENQASM":
            raise QasmSyntaxError("source must begin with 'OPENQASM 2.0;'", tok.line, tok.column)
        version = self._expect_kind("num", "version number")
        if version.text not in ("2.0", "2"):
            raise UnsupportedFeature(
                f"only OpenQASM 2.0 is supported, not {version.text}",
                version.line,
                version.column,
            )
        self._expect(";")
        while self._peek() is not None:
            self._statement()
        return Circuit(self.n_qubits, self.n_clbits, tuple(self.ops))

    def _statement(self) -> None:
        tok = self._next("a statement")
        if tok.kind != "id":
            raise QasmSyntaxError(f"expected a statement, found {tok.text!r}", tok.line, tok.column)
        if tok.text in _UNSUPPORTED:
            raise UnsupportedFeature(
                f"{_UNSUPPORTED[tok.text]} are outside the supported subset",
                tok.line,
                tok.column,
            )
        if tok.text == "include":
            name = self._expect_kind("string", "a file name string")
            if name.text != '"qelib1.inc"':
                raise UnsupportedFeature(
                    f"only qelib1.inc is available, not {name.text}", name.line, name.column
                )
            self._expect(";")
        elif tok.text in ("qreg", "creg"):
            self._register(tok.text)
        elif tok.text == "measure":
            self._measure()
        elif tok.text == "barrier":
            self._barrier()
        elif tok.text in GATE_SPECS:
            self._gate(tok)
        else:
            raise UnknownGate(f"unknown gate {tok.text!r}", tok.line, tok.column)

    def _register(self, which: str) -> None:
        name = self._expect_kind("id", "a register name")
        table = self.qregs if which == "qreg" else self.cregs
        if name.text in self.qregs or name.text in self.cregs:
            raise QasmSyntaxError(f"register {name.text!r} already declared", name.line, name.column)
        self._expect("[")
        size_tok = self._expect_kind("num", "a register size")
        if not size_tok.text.isdigit() or int(size_tok.text) < 1:
            raise QasmSyntaxError(
                f"register size must be a positive integer, found {size_tok.text!r}",
                size_tok.line,
                size_tok.column,
            )
        size = int(size_tok.text)
        self._expect("]")
        self._expect(";")
        if which == "qreg":
            table[name.text] = (self.n_qubits, size)
            self.n_qubits += size
        else:
            table[name.text] = (self.n_clbits, size)
            self.n_clbits += size

    def _arg(self, table: dict, what: str) -> tuple[str, int | None, _Token]:
        """Register reference ``name`` or ``name[i]``; returns (name, index, name token)."""
        name = self._expect_kind("id", f"a {what} register")
        if name.text not in table:
            raise QasmSyntaxError(
                f"undeclared {what} register {name.text!r}", name.line, name.column
            )
        if self._peek() is not None and self._peek().text == "[":
            self._expect("[")
            idx_tok = self._expect_kind("num", "an index")
            if not idx_tok.text.isdigit():
                raise QasmSyntaxError(
                    f"index must be an integer, found {idx_tok.text!r}",
                    idx_tok.line,
                    idx_tok.column,
                )
            self._expect("]")
            idx = int(idx_tok.text)
            offset, size = table[name.text]
            if idx >= size:
                raise IndexOutOfRange(
                    f"{name.text}[{idx}] exceeds register size {size}",
                    idx_tok.line,
                    idx_tok.column,
                )
            return name.text, idx, name
        return name.text, None, name

    def _measure(self) -> None:
        qname, qidx, qtok = self._arg(self.qregs, "quantum")
        self._expect("->")
        cname, cidx, ctok = self._arg(self.cregs, "classical")
        self._expect(";")
        qoff, qsize = self.qregs[qname]
        coff, csize = self.cregs[cname]
        if (qidx is None) != (cidx is None):
            raise QasmSyntaxError(
                "measure must pair indexed with indexed or register with register",
                qtok.line,
                qtok.column,
            )
        if qidx is None:
            if qsize != csize:
                raise QasmSyntaxError(
                    f"register sizes differ: {qname}[{qsize}] vs {cname}[{csize}]",
                    qtok.line,
                    qtok.column,
                )
            for i in range(qsize):
                self.ops.append(GateOp("measure", (qoff + i,), (coff + i,)))
        else:
            self.ops.append(GateOp("measure", (qoff + qidx,), (coff + cidx,)))

    def _barrier(self) -> None:
        qubits: list[int] = []
        while True:
            name, idx, _ = self._arg(self.qregs, "quantum")
            offset, size = self.qregs[name]
            if idx is None:
                qubits.extend(range(offset, offset + size))
            else:
                qubits.append(offset + idx)
            if self._peek() is not None and self._peek().text == ",":
                self._expect(",")
                continue
            break
        self._expect(";")
        self.ops.append(GateOp("barrier", tuple(qubits)))

    def _gate(self, name_tok: _Token) -> None:
        n_qubits, n_angles = GATE_SPECS[name_tok.text]
        angles: list[AngleExpr] = []
        if self._peek() is not None and self._peek().text == "(":
            self._expect("(")
            while True:
                angles.append(self._expr())
                if self._peek() is not None and self._peek().text == ",":
                    self._expect(",")
                    continue
                break
            self._expect(")")
        if len(angles) != n_angles:
            raise QasmSyntaxError(
                f"{name_tok.text} takes {n_angles} angle argument(s), got {len(angles)}",
                name_tok.line,
                name_tok.column,
            )
        qubits: list[int] = []
        while True:
            name, idx, tok = self._arg(self.qregs, "quantum")
            if idx is None:
                raise QasmSyntaxError(
                    f"gate arguments must be indexed, found bare register {name!r}",
                    tok.line,
                    tok.column,
                )
            offset, _ = self.qregs[name]
            qubits.append(offset + idx)
            if self._peek() is not None and self._peek().text == ",":
                self._expect(",")
                continue
            break
        self._expect(";")
        if len(qubits) != n_qubits:
            raise QasmSyntaxError(
                f"{name_tok.text} takes {n_qubits} qubit(s), got {len(qubits)}",
                name_tok.line,
                name_tok.column,
            )
        if len(set(qubits)) != len(qubits):
            raise QasmSyntaxError(
                f"{name_tok.text} qubit arguments must be distinct",
                name_tok.line,
                name_tok.column,
            )
        self.ops.append(GateOp(name_tok.text, tuple(qubits), (), tuple(angles)))

    # angle expression grammar: expr := term (('+'|'-') term)*
    #                           term := factor (('*'|'/') factor)*
    #                           factor := '-' factor | num | 'pi' | id | '(' expr ')'

    def _expr(self) -> AngleExpr:
        node = self._term()
        while self._peek() is not None and self._peek().text in ("+", "-"):
            op = self._next("an operator").text
            node = BinOp(op, node, self._term())
        return node

    def _term(self) -> AngleExpr:
        node = self._factor()
        while self._peek() is not None and self._peek().text in ("*", "/"):
            op = self._next("an operator").text
            node = BinOp(op, node, self._factor())
        return node

    def _factor(self) -> AngleExpr:
        tok = self._next("an angle expression")
        if tok.text == "-":
            return Neg(self._factor())
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "id":
            if tok.text == "pi":
                return Pi()
            return Param(tok.text)
        if tok.text == "(":
            node = self._expr()
            self._expect(")")
            return node
        raise QasmSyntaxError(
            f"expected an angle expression, found {tok.text!r}", tok.line, tok.column
        )


def parse_qasm(source: str) -> Circuit:
    """Parse OpenQASM 2.0 subset text into a ``Circuit``."""
    return _Parser(_tokenize(source)).parse()

"""Line-oriented pulse-program language.

::

    # comment
    PREP 11
    H A
    CNOT A B
    RX B 90
    P Y23 180        # raw selective pulse on levels 2,3
    WAIT 1e-4
    SWAP

Angles are in degrees, waits in seconds.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .gates import IdealPulse, pulse
from .spin import DIM

QUBITS = ("A", "B")
PREP_TARGETS = ("00", "01", "10", "11")
MNEMONICS = ("H", "CNOT", "RX", "RY", "RZ", "SWAP", "P", "WAIT", "PREP")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Statement:
    """One program line.

    ``args`` holds the symbolic operands (qubits, ``X01``-style pulse labels,
    prep targets) and ``value`` the numeric one (degrees or seconds). ``line``
    is kept for provenance but ignored by equality.
    """

    op: str
    args: tuple[str, ...] = ()
    value: float | None = None
    line: int = field(default=0, compare=False)

    def ideal_pulse(self) -> IdealPulse:
        if self.op != "P":
            raise ValueError("only raw P statements carry a single pulse")
        label = self.args[0]
        return pulse(label[0], int(label[1]), int(label[2]), math.radians(self.value))

    @property
    def radians(self) -> float:
        return math.radians(self.value)


@dataclass(frozen=True)
class GateProgram:
    statements: tuple[Statement, ...] = ()

    def __len__(self):
        return len(self.statements)

    def __iter__(self):
        return iter(self.statements)


_TOKEN = re.compile(r"\S+")


def _number(tok: str, line: int, col: int, what: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"non-numeric {what} {tok!r}", line, col) from None
    if not math.isfinite(v):
        raise ParseError(f"{what} must be finite", line, col)
    return v


def _parse_line(tokens: list[tuple[str, int]], line: int) -> Statement:
    (head, hcol), rest = tokens[0], tokens[1:]
    op = head.upper()
    if op not in MNEMONICS:
        raise ParseError(f"unknown mnemonic {head!r}", line, hcol)
    arity = {"H": 1, "CNOT": 2, "RX": 2, "RY": 2, "RZ": 2, "SWAP": 0, "P": 2, "WAIT": 1, "PREP": 1}[op]
    if len(rest) != arity:
        col = rest[arity][1] if len(rest) > arity else hcol + len(head)
        raise ParseError(f"{op} takes {arity} operand(s), got {len(rest)}", line, col)

    def qubit(i):
        tok, col = rest[i]
        if tok.upper() not in QUBITS:
            raise ParseError(f"unknown qubit {tok!r}", line, col)
        return tok.upper()

    if op == "H":
        return Statement(op, (qubit(0),), line=line)
    if op == "CNOT":
        c, t = qubit(0), qubit(1)
        if c == t:
            raise ParseError("control and target must differ", line, rest[1][1])
        return Statement(op, (c, t), line=line)
    if op in ("RX", "RY", "RZ"):
        return Statement(op, (qubit(0),), _number(rest[1][0], line, rest[1][1], "angle"), line=line)
    if op == "SWAP":
        return Statement(op, line=line)
    if op == "WAIT":
        v = _number(rest[0][0], line, rest[0][1], "wait time")
        if v < 0:
            raise ParseError("wait time must be non-negative", line, rest[0][1])
        return Statement(op, (), v, line=line)
    if op == "PREP":
        tok, col = rest[0]
        if tok not in PREP_TARGETS:
            raise ParseError(f"unknown prep target {tok!r}", line, col)
        return Statement(op, (tok,), line=line)
    # raw pulse
    tok, col = rest[0]
    if len(tok) != 3:
        raise ParseError(f"malformed pulse label {tok!r}, expected e.g. X01", line, col)
    axis = tok[0].upper()
    if axis not in ("X", "Y", "Z"):
        raise ParseError(f"unknown axis {tok[0]}", line, col)
    if not (tok[1].isdigit() and tok[2].isdigit()):
        raise ParseError(f"non-numeric level index in {tok!r}", line, col + 1)
    lo, hi = int(tok[1]), int(tok[2])
    for k, c in ((lo, col + 1), (hi, col + 2)):
        if k >= DIM:
            raise ParseError(f"level index {k} out of range 0..{DIM - 1}", line, c)
    if lo >= hi:
        raise ParseError(f"levels must be distinct and ascending, got {lo}{hi}", line, col + 1)
    return Statement(op, (f"{axis}{lo}{hi}",), _number(rest[1][0], line, rest[1][1], "angle"), line=line)


def parse_program(text: str) -> GateProgram:
    """Parse program text. Errors carry 1-based line and column."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        code = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(code)]
        if tokens:
            out.append(_parse_line(tokens, lineno))
    return GateProgram(tuple(out))


def render_statement(s: Statement) -> str:
    parts = [s.op, *s.args]
    if s.value is not None:
        parts.append(repr(float(s.value)))
    return " ".join(parts)


def render(prog: GateProgram) -> str:
    """Canonical text; ``parse_program(render(p)) == p``."""
    return "".join(render_statement(s) + "\n" for s in prog)

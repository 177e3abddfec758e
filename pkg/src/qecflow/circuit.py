"""Circuit intermediate representation, text format and benchmark generators.

The text format is a small subset of OpenQASM 2::

    qubits 3; clbits 3;          // or: qreg q[3]; creg c[3];
    h q[0];
    cx q[0],q[1];
    if (c[0:2]==3) x q[2];       // also c[i]==v and c==v
    measure q[0] -> c[0];

Conditions compare a contiguous clbit range against an integer whose least
significant bit is the lowest clbit of the range.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class GateKind(enum.Enum):
    H = "h"
    X = "x"
    Y = "y"
    Z = "z"
    S = "s"
    SDG = "sdg"
    T = "t"
    CX = "cx"
    CZ = "cz"
    I = "id"
    MEASURE = "measure"
    RESET = "reset"

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.CX, GateKind.CZ) else 1

    @property
    def is_unitary(self) -> bool:
        return self not in (GateKind.MEASURE, GateKind.RESET)

    @property
    def is_pauli(self) -> bool:
        return self in (GateKind.I, GateKind.X, GateKind.Y, GateKind.Z)


CLIFFORD_KINDS = frozenset(
    {GateKind.H, GateKind.X, GateKind.Y, GateKind.Z, GateKind.S, GateKind.SDG,
     GateKind.CX, GateKind.CZ, GateKind.I}
)

_INVERSE = {GateKind.S: GateKind.SDG, GateKind.SDG: GateKind.S}


@dataclass(frozen=True)
class Condition:
    """Execute only if ``clbits[start:start + width]`` reads ``value``."""

    start: int
    width: int
    value: int

    def __post_init__(self):
        if self.start < 0 or self.width < 1:
            raise ValueError(f"bad condition range start={self.start} width={self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"condition value {self.value} does not fit in {self.width} bits")

    @property
    def clbits(self) -> range:
        return range(self.start, self.start + self.width)

    def holds(self, bits: Sequence[int]) -> bool:
        v = 0
        for k, b in enumerate(bits[self.start:self.start + self.width]):
            v |= int(b) << k
        return v == self.value


@dataclass(frozen=True)
class Operation:
    """One gate, measurement or reset.

    ``tag`` is compiler bookkeeping (which pass emitted the op). It is not
    serialized and does not take part in equality.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    clbits: tuple[int, ...] = ()
    condition: Condition | None = None
    tag: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "clbits", tuple(int(c) for c in self.clbits))
        if len(self.qubits) != self.kind.arity:
            raise ValueError(f"{self.kind.value} takes {self.kind.arity} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind.value} repeats a qubit: {self.qubits}")
        if any(q < 0 for q in self.qubits) or any(c < 0 for c in self.clbits):
            raise ValueError("negative register index")
        want_clbits = 1 if self.kind is GateKind.MEASURE else 0
        if len(self.clbits) != want_clbits:
            raise ValueError(f"{self.kind.value} takes {want_clbits} clbit(s), got {len(self.clbits)}")
        if self.condition is not None and not self.kind.is_unitary:
            raise ValueError(f"{self.kind.value} cannot be classically conditioned")

    def retag(self, tag: str) -> "Operation":
        return Operation(self.kind, self.qubits, self.clbits, self.condition, tag)

    def remap(self, qubit_map: Sequence[int] | dict[int, int], tag: str | None = None) -> "Operation":
        return Operation(self.kind, tuple(qubit_map[q] for q in self.qubits), self.clbits,
                         self.condition, self.tag if tag is None else tag)

    def inverse(self) -> "Operation":
        if not self.kind.is_unitary:
            raise ValueError(f"{self.kind.value} has no inverse")
        if self.kind is GateKind.T:
            raise ValueError("T inverse is not in the gate set")
        return Operation(_INVERSE.get(self.kind, self.kind), self.qubits, (), self.condition, self.tag)


def gate(kind: GateKind | str, *qubits: int, condition: Condition | None = None, tag: str = "") -> Operation:
    if isinstance(kind, str):
        kind = GateKind(kind)
    return Operation(kind, qubits, (), condition, tag)


def measure(qubit: int, clbit: int, tag: str = "") -> Operation:
    return Operation(GateKind.MEASURE, (qubit,), (clbit,), None, tag)


def reset(qubit: int, tag: str = "") -> Operation:
    return Operation(GateKind.RESET, (qubit,), (), None, tag)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    num_clbits: int
    ops: tuple[Operation, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if self.num_qubits < 0 or self.num_clbits < 0:
            raise ValueError("register sizes must be non-negative")

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def with_ops(self, ops: Iterable[Operation], *, num_qubits: int | None = None,
                 num_clbits: int | None = None, name: str | None = None) -> "Circuit":
        return Circuit(self.num_qubits if num_qubits is None else num_qubits,
                       self.num_clbits if num_clbits is None else num_clbits,
                       tuple(ops), self.name if name is None else name)

    def count(self, kind: GateKind) -> int:
        return sum(op.kind is kind for op in self.ops)

    @property
    def kinds(self) -> set[GateKind]:
        return {op.kind for op in self.ops}

    def is_clifford(self) -> bool:
        return all(op.kind in CLIFFORD_KINDS or not op.kind.is_unitary for op in self.ops)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    index: int  # op index, -1 for circuit-level
    severity: str  # "error" or "warning"
    message: str


def validate(c: Circuit) -> list[Violation]:
    """Report range, arity and clbit-collision problems.

    Repeated writes to one clbit are warnings: syndrome bits are rewritten
    every correction round in compiled circuits.
    """
    out: list[Violation] = []
    written: dict[int, int] = {}
    for i, op in enumerate(c.ops):
        if len(op.qubits) != op.kind.arity:
            out.append(Violation(i, "error", f"{op.kind.value} expects {op.kind.arity} qubits"))
        if len(set(op.qubits)) != len(op.qubits):
            out.append(Violation(i, "error", f"duplicate qubit in {op.kind.value} {op.qubits}"))
        for q in op.qubits:
            if not 0 <= q < c.num_qubits:
                out.append(Violation(i, "error", f"qubit {q} out of range (num_qubits={c.num_qubits})"))
        for b in op.clbits:
            if not 0 <= b < c.num_clbits:
                out.append(Violation(i, "error", f"clbit {b} out of range (num_clbits={c.num_clbits})"))
        if op.condition is not None and op.condition.start + op.condition.width > c.num_clbits:
            out.append(Violation(i, "error", f"condition reads clbits beyond {c.num_clbits}"))
        if op.kind is GateKind.MEASURE and op.clbits:
            b = op.clbits[0]
            if b in written:
                out.append(Violation(i, "warning", f"clbit {b} already written by op {written[b]}"))
            written[b] = i
    return out


def check(c: Circuit) -> None:
    errors = [v for v in validate(c) if v.severity == "error"]
    if errors:
        v = errors[0]
        raise ValueError(f"invalid circuit (op {v.index}): {v.message}")


# ---------------------------------------------------------------------------
# text format


class CircuitParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_NAME_RE = re.compile(r"//\s*name:\s*(\S+)")
_IDX = r"\s*\[\s*(\d+)\s*\]"
_HEADER_RES = [
    ("qubits", re.compile(r"qubits\s+(\d+)$")),
    ("clbits", re.compile(r"clbits\s+(\d+)$")),
    ("qreg", re.compile(r"qreg\s+([A-Za-z_]\w*)" + _IDX + "$")),
    ("creg", re.compile(r"creg\s+([A-Za-z_]\w*)" + _IDX + "$")),
]
_IGNORED_RE = re.compile(r'(OPENQASM\s+[\d.]+|include\s+"[^"]*")$')
_COND_RE = re.compile(r"if\s*\(\s*([A-Za-z_]\w*)\s*(\[\s*(\d+)\s*(?::\s*(\d+)\s*)?\])?\s*==\s*(\d+)\s*\)\s*")
_MEASURE_RE = re.compile(r"measure\s+([A-Za-z_]\w*)" + _IDX + r"\s*->\s*([A-Za-z_]\w*)" + _IDX + "$")
_GATE_RE = re.compile(r"([A-Za-z_]\w*)\s+(.+)$")
_QARG_RE = re.compile(r"([A-Za-z_]\w*)" + _IDX + "$")


def _statements(text: str):
    """Yield (statement, line, column) with comments stripped."""
    pos_line, pos_col = 1, 1
    buf: list[str] = []
    start: tuple[int, int] | None = None
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if text.startswith("//", i):
            j = text.find("\n", i)
            j = n if j < 0 else j
            pos_col += j - i
            i = j
            continue
        if ch == ";":
            stmt = "".join(buf).strip()
            if stmt:
                yield stmt, start[0], start[1]
            buf, start = [], None
        else:
            if start is None and not ch.isspace():
                start = (pos_line, pos_col)
            if start is not None:
                buf.append(ch)
        if ch == "\n":
            pos_line, pos_col = pos_line + 1, 1
        else:
            pos_col += 1
        i += 1
    tail = "".join(buf).strip()
    if tail:
        raise CircuitParseError("missing ';' after statement", *start)


def parse_circuit(text: str) -> Circuit:
    """Parse the text format into a :class:`Circuit`."""
    m = _NAME_RE.match(text.lstrip())
    name = m.group(1) if m else ""
    nq: int | None = None
    nc = 0
    qname, cname = "q", "c"
    ops: list[Operation] = []
    for stmt, line, col in _statements(text):
        stmt = " ".join(stmt.split())
        if _IGNORED_RE.match(stmt):
            continue
        header = None
        for key, rx in _HEADER_RES:
            hm = rx.match(stmt)
            if hm:
                header = (key, hm)
                break
        if header is not None:
            key, hm = header
            if ops:
                raise CircuitParseError(f"'{key}' declaration after the first gate", line, col)
            if key == "qubits":
                nq = int(hm.group(1))
            elif key == "clbits":
                nc = int(hm.group(1))
            elif key == "qreg":
                if nq is not None:
                    raise CircuitParseError("only one quantum register is supported", line, col)
                qname, nq = hm.group(1), int(hm.group(2))
            else:
                cname, nc = hm.group(1), int(hm.group(2))
            continue
        if nq is None:
            raise CircuitParseError("gate before register declaration", line, col)
        ops.append(_parse_op(stmt, line, col, nq, nc, qname, cname))
    if nq is None:
        raise CircuitParseError("no quantum register declared", 1, 1)
    return Circuit(nq, nc, tuple(ops), name)


def _parse_op(stmt: str, line: int, col: int, nq: int, nc: int, qname: str, cname: str) -> Operation:
    cond = None
    cm = _COND_RE.match(stmt)
    if stmt.startswith("if") and cm is None:
        raise CircuitParseError("malformed condition", line, col)
    if cm:
        reg, _, lo, hi, val = cm.groups()
        if reg != cname:
            raise CircuitParseError(f"unknown classical register '{reg}'", line, col)
        if lo is None:
            start, width = 0, nc
        elif hi is None:
            start, width = int(lo), 1
        else:
            start, width = int(lo), int(hi) - int(lo)
        if width < 1 or start + width > nc:
            raise CircuitParseError(f"condition range out of bounds for {nc} clbits", line, col)
        try:
            cond = Condition(start, width, int(val))
        except ValueError as e:
            raise CircuitParseError(str(e), line, col) from None
        stmt = stmt[cm.end():]
    mm = _MEASURE_RE.match(stmt)
    if mm:
        if cond is not None:
            raise CircuitParseError("measure cannot be conditioned", line, col)
        qr, q, cr, c = mm.groups()
        if qr != qname or cr != cname:
            raise CircuitParseError(f"unknown register in '{stmt}'", line, col)
        q, c = int(q), int(c)
        if q >= nq:
            raise CircuitParseError(f"qubit index {q} out of range (register size {nq})", line, col)
        if c >= nc:
            raise CircuitParseError(f"clbit index {c} out of range (register size {nc})", line, col)
        return measure(q, c)
    gm = _GATE_RE.match(stmt)
    if gm is None:
        raise CircuitParseError(f"syntax error in '{stmt}'", line, col)
    gname, args = gm.groups()
    try:
        kind = GateKind(gname.lower())
    except ValueError:
        raise CircuitParseError(f"unknown gate '{gname}'", line, col) from None
    if kind is GateKind.MEASURE:
        raise CircuitParseError("measure needs '-> c[i]'", line, col)
    qubits = []
    for arg in args.split(","):
        am = _QARG_RE.match(arg.strip())
        if am is None:
            raise CircuitParseError(f"bad qubit argument '{arg.strip()}'", line, col)
        if am.group(1) != qname:
            raise CircuitParseError(f"unknown quantum register '{am.group(1)}'", line, col)
        q = int(am.group(2))
        if q >= nq:
            raise CircuitParseError(f"qubit index {q} out of range (register size {nq})", line, col)
        qubits.append(q)
    if len(qubits) != kind.arity:
        raise CircuitParseError(f"{kind.value} takes {kind.arity} qubit(s), got {len(qubits)}", line, col)
    if cond is not None and kind is GateKind.RESET:
        raise CircuitParseError("reset cannot be conditioned", line, col)
    try:
        return Operation(kind, tuple(qubits), (), cond)
    except ValueError as e:
        raise CircuitParseError(str(e), line, col) from None


def _format_op(op: Operation) -> str:
    if op.kind is GateKind.MEASURE:
        return f"measure q[{op.qubits[0]}] -> c[{op.clbits[0]}];"
    body = f"{op.kind.value} " + ",".join(f"q[{q}]" for q in op.qubits) + ";"
    if op.condition is None:
        return body
    cd = op.condition
    rng = f"c[{cd.start}]" if cd.width == 1 else f"c[{cd.start}:{cd.start + cd.width}]"
    return f"if ({rng}=={cd.value}) {body}"


def serialize_circuit(c: Circuit) -> str:
    lines = []
    if c.name:
        lines.append(f"// name: {c.name}")
    lines.append(f"qubits {c.num_qubits}; clbits {c.num_clbits};")
    lines.extend(_format_op(op) for op in c.ops)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# benchmarks


def ghz_benchmark(n: int) -> Circuit:
    """H on qubit 0, a CX fan-out from qubit 0, then measure every qubit."""
    if n < 1:
        raise ValueError("GHZ benchmark needs at least one qubit")
    ops = [gate(GateKind.H, 0)]
    ops += [gate(GateKind.CX, 0, k) for k in range(1, n)]
    ops += [measure(k, k) for k in range(n)]
    return Circuit(n, n, tuple(ops), f"ghz_{n}")


def pad_dummy_ops(c: Circuit, count: int) -> Circuit:
    """Insert ``count`` identity gates before the first measurement.

    Qubits are visited round-robin from qubit 0. The ideal output is unchanged
    but every identity gate is a qubit use for the noise model.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if c.num_qubits < 1:
        raise ValueError("cannot pad a circuit without qubits")
    if count == 0:
        return c
    at = next((i for i, op in enumerate(c.ops) if op.kind is GateKind.MEASURE), len(c.ops))
    dummies = [gate(GateKind.I, k % c.num_qubits) for k in range(count)]
    return c.with_ops(c.ops[:at] + tuple(dummies) + c.ops[at:])

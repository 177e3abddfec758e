"""Catalog of stabilizer codes with encoders, syndrome blocks and lookup decoders.

Encoders are synthesized from the stabilizer generators and the logical X:
the generators are brought to reduced row-echelon form on their X part, the
input qubit is the first X-support qubit of the reduced logical X, and each
X-type generator is then applied as "H on its pivot, controlled-rest from the
pivot". The decoder is the encoder run backwards.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Sequence

from .circuit import Condition, GateKind, Operation, gate, measure, reset
from .paulis import PauliString

_PAULI_GATE = {"X": GateKind.X, "Y": GateKind.Y, "Z": GateKind.Z}
_CTRL_GATE = {"X": GateKind.CX, "Z": GateKind.CZ}


class UnknownCodeError(ValueError):
    pass


def controlled_pauli(control: int, target: int, label: str, tag: str = "") -> list[Operation]:
    """Controlled-X/Y/Z from ``control`` onto ``target`` in the native gate set."""
    if label in _CTRL_GATE:
        return [gate(_CTRL_GATE[label], control, target, tag=tag)]
    if label == "Y":
        return [gate(GateKind.SDG, target, tag=tag), gate(GateKind.CX, control, target, tag=tag),
                gate(GateKind.S, target, tag=tag)]
    raise ValueError(f"no controlled form for {label!r}")


def synthesize_encoder(stabilizers: Sequence[PauliString], logical_x: PauliString,
                       logical_z: PauliString) -> tuple[list[Operation], int]:
    """Encoder on local qubits ``0..n-1`` and the qubit that carries the input state."""
    n = len(logical_x)
    rows = list(stabilizers)
    pivots: list[int] = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i].x_bits[col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i].x_bits[col]:
                rows[i] = rows[i] * rows[r]
        pivots.append(col)
        r += 1
    for g in rows[r:]:
        if g.sign < 0:
            raise ValueError(f"Z-type generator {g} must have a + sign for this construction")
    if any(logical_z.x_bits) or logical_z.sign < 0:
        raise ValueError("logical Z must be a +Z-type operator")
    lx = logical_x
    for i, col in enumerate(pivots):
        if lx.x_bits[col]:
            lx = lx * rows[i]
    j = next(q for q in range(n) if lx.x_bits[q])
    ops: list[Operation] = []
    if lx.ops[j] == "Y":
        ops.append(gate(GateKind.S, j))
    if lx.sign < 0:
        ops.append(gate(GateKind.Z, j))
    for q in lx.support:
        if q != j and lx.ops[q] != "Z":
            ops += controlled_pauli(j, q, lx.ops[q])
    for i, col in enumerate(pivots):
        g = rows[i]
        ops.append(gate(GateKind.H, col))
        if g.ops[col] == "Y":
            ops.append(gate(GateKind.S, col))
        if g.sign < 0:
            ops.append(gate(GateKind.Z, col))
        for q in g.support:
            if q != col:
                ops += controlled_pauli(col, q, g.ops[q])
    return ops, j


def invert_fragment(ops: Sequence[Operation]) -> list[Operation]:
    return [op.inverse() for op in reversed(ops)]


@dataclass
class DecoderTable:
    """Syndrome value (bit ``i`` = stabilizer ``i``) -> single-qubit corrections."""

    entries: dict[int, tuple[tuple[int, str], ...]]
    misses: int = 0

    def lookup(self, syndrome: int) -> tuple[tuple[int, str], ...]:
        if syndrome == 0:
            return ()
        hit = self.entries.get(syndrome)
        if hit is None:
            self.misses += 1
            return ()
        return hit


@dataclass(frozen=True)
class EccScheme:
    name: str
    stabilizers: tuple[PauliString, ...]
    logical_x: PauliString
    logical_z: PauliString
    supported_kinds: frozenset[GateKind]
    distance: int
    corrects: str  # single-qubit error types the decoder is built for
    summary: str = ""

    def __post_init__(self):
        n = len(self.logical_x)
        for g in self.stabilizers:
            if len(g) != n:
                raise ValueError(f"{self.name}: generator {g} has wrong length")
            if g.sign < 0:
                raise ValueError(f"{self.name}: generators must have + sign")
        for i, a in enumerate(self.stabilizers):
            for b in self.stabilizers[i + 1:]:
                if not a.commutes(b):
                    raise ValueError(f"{self.name}: generators {a} and {b} anticommute")
        for lop in (self.logical_x, self.logical_z):
            if not all(lop.commutes(g) for g in self.stabilizers):
                raise ValueError(f"{self.name}: logical {lop} does not commute with the stabilizers")
        if self.logical_x.commutes(self.logical_z):
            raise ValueError(f"{self.name}: logical X and Z must anticommute")

    @property
    def n_physical(self) -> int:
        return len(self.logical_x)

    @property
    def n_ancilla(self) -> int:
        return len(self.stabilizers)

    @property
    def n_stabilizers(self) -> int:
        return len(self.stabilizers)

    @functools.cached_property
    def _encoding(self) -> tuple[tuple[Operation, ...], int]:
        ops, j = synthesize_encoder(self.stabilizers, self.logical_x, self.logical_z)
        return tuple(ops), j

    @property
    def encoder(self) -> tuple[Operation, ...]:
        """Encoder on local qubits; the input state sits on :attr:`readout_qubit`."""
        return self._encoding[0]

    @property
    def readout_qubit(self) -> int:
        return self._encoding[1]

    @property
    def decoder(self) -> tuple[Operation, ...]:
        return tuple(invert_fragment(self.encoder))

    def syndrome_of(self, error: PauliString) -> int:
        return sum(1 << i for i, g in enumerate(self.stabilizers) if not g.commutes(error))

    @functools.cached_property
    def decoder_table(self) -> DecoderTable:
        """Built by enumerating every single-qubit error; the first error seen
        for a syndrome wins (degenerate errors differ by a stabilizer)."""
        entries: dict[int, tuple[tuple[int, str], ...]] = {}
        for q in range(self.n_physical):
            for label in "XZY":
                s = self.syndrome_of(PauliString.single(self.n_physical, q, label))
                if s and s not in entries:
                    entries[s] = ((q, label),)
        return DecoderTable(entries)

    # -- fragments -------------------------------------------------------------

    def logical_fragment(self, kind: GateKind, blocks: Sequence[Sequence[int]], tag: str = "") -> list[Operation]:
        """Physical realization of a logical gate on the given data-qubit blocks."""
        if kind not in self.supported_kinds or not kind.is_unitary:
            raise ValueError(f"{kind.value} is not a supported logical gate for {self.name}")
        if kind is GateKind.X:
            return _pauli_ops(self.logical_x, blocks[0], tag)
        if kind is GateKind.Z:
            return _pauli_ops(self.logical_z, blocks[0], tag)
        if kind.arity == 2:
            a, b = blocks
            return [gate(kind, a[i], b[i], tag=tag) for i in range(self.n_physical)]
        return [gate(kind, q, tag=tag) for q in blocks[0]]

    def syndrome_block(self, data: Sequence[int], ancillas: Sequence[int], clbit_start: int,
                       tag: str = "") -> list[Operation]:
        """Extract every stabilizer into ``clbit_start + i`` and apply table corrections.

        Ancillas are reset before use and shared round-robin if there are
        fewer ancillas than stabilizers.
        """
        if not ancillas:
            raise ValueError("syndrome extraction needs at least one ancilla")
        ops: list[Operation] = []
        for i, g in enumerate(self.stabilizers):
            a = ancillas[i % len(ancillas)]
            ops += [reset(a, tag=tag), gate(GateKind.H, a, tag=tag)]
            for q in g.support:
                ops += controlled_pauli(a, data[q], g.ops[q], tag=tag)
            ops += [gate(GateKind.H, a, tag=tag), measure(a, clbit_start + i, tag=tag)]
        width = self.n_stabilizers
        for s, corr in sorted(self.decoder_table.entries.items()):
            cond = Condition(clbit_start, width, s)
            for q, label in corr:
                ops.append(gate(_PAULI_GATE[label], data[q], condition=cond, tag=tag))
        return ops

    def describe(self) -> str:
        kinds = ",".join(sorted(k.value for k in self.supported_kinds | {GateKind.MEASURE}))
        return (f"{self.name}\tn_physical={self.n_physical}\tn_ancilla={self.n_ancilla}"
                f"\tdistance={self.distance}\tgates={kinds}")


def _pauli_ops(p: PauliString, block: Sequence[int], tag: str) -> list[Operation]:
    return [gate(_PAULI_GATE[lab], block[q], tag=tag) for q, lab in enumerate(p.ops) if lab != "I"]


def _ps(*texts: str) -> tuple[PauliString, ...]:
    return tuple(PauliString.parse(t) for t in texts)


_K = GateKind


def _build_catalog() -> dict[str, EccScheme]:
    surface_x = [(0, 1, 3, 4), (4, 5, 7, 8), (1, 2), (6, 7)]
    surface_z = [(1, 2, 4, 5), (3, 4, 6, 7), (0, 3), (5, 8)]
    schemes = [
        EccScheme(
            "bitflip3", _ps("ZZI", "IZZ"), PauliString("XXX"), PauliString("ZII"),
            frozenset({_K.I, _K.X, _K.CX}), distance=3, corrects="X",
            summary="three-qubit repetition code; corrects one bit flip, no phase protection",
        ),
        EccScheme(
            "shor9",
            _ps("ZZIIIIIII", "IZZIIIIII", "IIIZZIIII", "IIIIZZIII", "IIIIIIZZI", "IIIIIIIZZ",
                "XXXXXXIII", "IIIXXXXXX"),
            PauliString("X" * 9), PauliString("Z" * 9),
            frozenset({_K.I, _K.X, _K.Z, _K.CX}), distance=3, corrects="XYZ",
            summary="nine-qubit Shor code",
        ),
        EccScheme(
            "laflamme5", _ps("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"),
            PauliString("XXXXX"), PauliString("ZZZZZ"),
            frozenset({_K.I, _K.X, _K.Z}), distance=3, corrects="XYZ",
            summary="five-qubit perfect code",
        ),
        EccScheme(
            "steane7",
            _ps("XXXXIII", "IXXIXXI", "IIXXIXX", "ZZZZIII", "IZZIZZI", "IIZZIZZ"),
            PauliString("X" * 7), PauliString("Z" * 7),
            frozenset({_K.I, _K.X, _K.Y, _K.Z, _K.H, _K.CX, _K.CZ}), distance=3, corrects="XYZ",
            summary="seven-qubit Steane code with transversal Clifford gates",
        ),
        EccScheme(
            "surface_d3",
            tuple(PauliString.from_support(9, "X", s) for s in surface_x)
            + tuple(PauliString.from_support(9, "Z", s) for s in surface_z),
            PauliString.from_support(9, "X", (0, 3, 6)), PauliString.from_support(9, "Z", (0, 1, 2)),
            frozenset({_K.I, _K.X, _K.Z}), distance=3, corrects="XYZ",
            summary="distance-3 rotated surface code patch (lookup-table decoding)",
        ),
    ]
    return {s.name: s for s in schemes}


CODE_NAMES = ("bitflip3", "shor9", "laflamme5", "steane7", "surface_d3")


@functools.lru_cache(maxsize=None)
def _catalog() -> dict[str, EccScheme]:
    return _build_catalog()


def get_scheme(name: str) -> EccScheme:
    try:
        return _catalog()[name]
    except KeyError:
        raise UnknownCodeError(f"unknown code {name!r}; valid codes: {', '.join(CODE_NAMES)}") from None


def all_schemes() -> list[EccScheme]:
    return [get_scheme(n) for n in CODE_NAMES]

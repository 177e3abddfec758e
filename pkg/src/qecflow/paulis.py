"""Signed Pauli strings for code definitions and compile-time reasoning."""

from __future__ import annotations

from dataclasses import dataclass

# (a, b) -> (phase exponent of i, product label) for single-qubit a*b
_MUL = {}
for _a in "IXYZ":
    for _b in "IXYZ":
        if _a == "I":
            _MUL[_a, _b] = (0, _b)
        elif _b == "I":
            _MUL[_a, _b] = (0, _a)
        elif _a == _b:
            _MUL[_a, _b] = (0, "I")
        else:
            _c = ({"X", "Y", "Z"} - {_a, _b}).pop()
            _MUL[_a, _b] = (1 if (_a + _b) in ("XY", "YZ", "ZX") else 3, _c)


@dataclass(frozen=True)
class PauliString:
    """``sign * ops[0] ⊗ ops[1] ⊗ ...`` with ``sign`` in {+1, -1}."""

    ops: str
    sign: int = 1

    def __post_init__(self):
        if set(self.ops) - set("IXYZ"):
            raise ValueError(f"bad Pauli string {self.ops!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        text = text.strip()
        sign = -1 if text.startswith("-") else 1
        return cls(text.lstrip("+-"), sign)

    @classmethod
    def single(cls, n: int, q: int, label: str) -> "PauliString":
        return cls("I" * q + label + "I" * (n - q - 1))

    @classmethod
    def from_support(cls, n: int, label: str, support) -> "PauliString":
        ops = ["I"] * n
        for q in support:
            ops[q] = label
        return cls("".join(ops))

    def __len__(self) -> int:
        return len(self.ops)

    def __str__(self) -> str:
        return ("-" if self.sign < 0 else "+") + self.ops

    @property
    def support(self) -> list[int]:
        return [i for i, p in enumerate(self.ops) if p != "I"]

    @property
    def weight(self) -> int:
        return len(self.support)

    @property
    def x_bits(self) -> tuple[int, ...]:
        return tuple(int(p in "XY") for p in self.ops)

    @property
    def z_bits(self) -> tuple[int, ...]:
        return tuple(int(p in "ZY") for p in self.ops)

    def commutes(self, other: "PauliString") -> bool:
        anti = sum(1 for a, b in zip(self.ops, other.ops) if a != "I" and b != "I" and a != b)
        return anti % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        if len(self) != len(other):
            raise ValueError("length mismatch")
        phase = 0 if self.sign > 0 else 2
        phase += 0 if other.sign > 0 else 2
        out = []
        for a, b in zip(self.ops, other.ops):
            e, c = _MUL[a, b]
            phase += e
            out.append(c)
        phase %= 4
        if phase % 2:
            raise ValueError(f"product of anticommuting Paulis {self} * {other} is not Hermitian")
        return PauliString("".join(out), 1 if phase == 0 else -1)

    def restricted(self, drop: int) -> "PauliString":
        """Same string with qubit ``drop`` set to identity (sign kept)."""
        ops = list(self.ops)
        ops[drop] = "I"
        return PauliString("".join(ops), self.sign)

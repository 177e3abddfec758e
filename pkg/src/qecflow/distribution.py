"""Measurement-outcome distributions shared by every simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np


@dataclass(frozen=True)
class OutcomeDistribution:
    """Map from clbit strings to probabilities.

    Character ``i`` of a key is clbit ``i``. ``shots`` is ``None`` for exact
    distributions.
    """

    entries: Mapping[str, float]
    shots: int | None = None

    def __post_init__(self):
        clean = {k: float(v) for k, v in sorted(self.entries.items()) if v > 0}
        if any(v < 0 for v in self.entries.values()):
            raise ValueError("negative probability")
        total = sum(clean.values())
        if clean and abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> "OutcomeDistribution":
        shots = int(sum(counts.values()))
        if shots <= 0:
            raise ValueError("no shots recorded")
        return cls({k: v / shots for k, v in counts.items()}, shots)

    @classmethod
    def from_weights(cls, weights: Mapping[str, float], shots: int | None = None) -> "OutcomeDistribution":
        """Normalize non-negative weights (tiny negative round-off is clipped)."""
        w = {k: max(0.0, float(v)) for k, v in weights.items()}
        total = math.fsum(w.values())
        if total <= 0:
            raise ValueError("all weights are zero")
        return cls({k: v / total for k, v in w.items()}, shots)

    @classmethod
    def from_index_counts(cls, idx: np.ndarray, counts: np.ndarray, width: int) -> "OutcomeDistribution":
        """Build from integer clbit records (bit ``i`` = clbit ``i``) and their counts."""
        out: dict[str, int] = {}
        for v, k in zip(idx.tolist(), counts.tolist()):
            if k:
                key = bits_to_key(int(v), width)
                out[key] = out.get(key, 0) + int(k)
        return cls.from_counts(out)

    @property
    def is_exact(self) -> bool:
        return self.shots is None

    @property
    def width(self) -> int:
        return len(next(iter(self.entries), ""))

    def __getitem__(self, key: str) -> float:
        return self.entries.get(key, 0.0)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def items(self):
        return self.entries.items()

    def support(self) -> set[str]:
        return set(self.entries)

    def marginal(self, clbits: Iterable[int]) -> "OutcomeDistribution":
        """Distribution over the listed clbits, in the listed order."""
        clbits = list(clbits)
        out: dict[str, float] = {}
        for k, v in self.entries.items():
            key = "".join(k[i] for i in clbits)
            out[key] = out.get(key, 0.0) + v
        return OutcomeDistribution.from_weights(out, self.shots)

    def tvd(self, other: "OutcomeDistribution") -> float:
        keys = self.support() | other.support()
        return 0.5 * sum(abs(self[k] - other[k]) for k in keys)

    def format_lines(self) -> list[str]:
        return [f"{k} {v!r}" for k, v in self.entries.items()]


def bits_to_key(value: int, width: int) -> str:
    return "".join("1" if (value >> i) & 1 else "0" for i in range(width))


def tvd(p: OutcomeDistribution, q: OutcomeDistribution) -> float:
    return p.tvd(q)

"""Distribution-level fidelity measures."""

from __future__ import annotations

import math
from typing import Mapping

from .distribution import OutcomeDistribution

_NORM_TOL = 1e-9


def _entries(d: OutcomeDistribution | Mapping[str, float]) -> Mapping[str, float]:
    entries = d.entries if isinstance(d, OutcomeDistribution) else d
    if any(v < 0 for v in entries.values()):
        raise ValueError("distribution has negative entries")
    total = math.fsum(entries.values())
    if abs(total - 1.0) > _NORM_TOL:
        raise ValueError(f"distribution is not normalized (sum={total})")
    return entries


def hellinger_coefficient(p: OutcomeDistribution | Mapping[str, float],
                          q: OutcomeDistribution | Mapping[str, float]) -> float:
    """Bhattacharyya/Hellinger coefficient sum_i sqrt(p_i q_i); missing keys count as 0."""
    a, b = _entries(p), _entries(q)
    if len(b) < len(a):
        a, b = b, a
    s = math.fsum(math.sqrt(v * b.get(k, 0.0)) for k, v in a.items())
    return min(1.0, max(0.0, s))

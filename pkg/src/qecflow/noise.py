"""Noise channels and the per-qubit-use application policy."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

PAULI_LABELS = ("I", "X", "Y", "Z")

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = {"I": _I2, "X": _X, "Y": _Y, "Z": _Z}


class ChannelKind(enum.Enum):
    DEPOLARIZING = "depolarizing"
    BIT_FLIP = "bitflip"
    PHASE_FLIP = "phaseflip"
    AMPLITUDE_DAMPING = "damping"


@dataclass(frozen=True)
class NoiseChannel:
    """A single-qubit channel; ``p`` is the damping parameter for amplitude damping."""

    kind: ChannelKind
    p: float

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", ChannelKind(self.kind))
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"channel probability must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class NoiseModel:
    """One channel applied after every operation on every qubit it touches.

    Measurements count as a use with the noise placed before readout; that
    can be switched off with ``noisy_measurement``. Operations whose tag is in
    ``exempt_tags`` are noiseless.
    """

    channel: NoiseChannel
    seed: int = 0
    noisy_measurement: bool = True
    exempt_tags: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "exempt_tags", frozenset(self.exempt_tags))

    @property
    def is_noiseless(self) -> bool:
        return self.channel.p == 0.0


def depolarizing(p: float, seed: int = 0, **kw) -> NoiseModel:
    return NoiseModel(NoiseChannel(ChannelKind.DEPOLARIZING, p), seed, **kw)


def bit_flip(p: float, seed: int = 0, **kw) -> NoiseModel:
    return NoiseModel(NoiseChannel(ChannelKind.BIT_FLIP, p), seed, **kw)


def phase_flip(p: float, seed: int = 0, **kw) -> NoiseModel:
    return NoiseModel(NoiseChannel(ChannelKind.PHASE_FLIP, p), seed, **kw)


def amplitude_damping(gamma: float, seed: int = 0, **kw) -> NoiseModel:
    return NoiseModel(NoiseChannel(ChannelKind.AMPLITUDE_DAMPING, gamma), seed, **kw)


def is_clifford_compatible(ch: NoiseChannel) -> bool:
    return ch.kind is not ChannelKind.AMPLITUDE_DAMPING


def pauli_probabilities(ch: NoiseChannel) -> tuple[float, float, float, float]:
    """(pI, pX, pY, pZ) of a Pauli channel."""
    p = ch.p
    if ch.kind is ChannelKind.DEPOLARIZING:
        return (1.0 - 0.75 * p, p / 4, p / 4, p / 4)
    if ch.kind is ChannelKind.BIT_FLIP:
        return (1.0 - p, p, 0.0, 0.0)
    if ch.kind is ChannelKind.PHASE_FLIP:
        return (1.0 - p, 0.0, 0.0, p)
    raise ValueError(f"{ch.kind.value} channel is not Pauli-realizable")


def compose_pauli(probs: tuple[float, float, float, float], times: int) -> tuple[float, float, float, float]:
    """Pauli channel applied ``times`` times in a row."""
    pi, px, py, pz = probs
    fx = (pi + px - py - pz) ** times
    fy = (pi - px + py - pz) ** times
    fz = (pi - px - py + pz) ** times
    out = ((1 + fx + fy + fz) / 4, (1 + fx - fy - fz) / 4, (1 - fx + fy - fz) / 4, (1 - fx - fy + fz) / 4)
    return tuple(max(0.0, v) for v in out)


def compose_damping(gamma: float, times: int) -> float:
    return 1.0 - (1.0 - gamma) ** times


def damping_kraus(gamma: float) -> list[np.ndarray]:
    return [np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
            np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)]


def pauli_kraus(probs: tuple[float, float, float, float]) -> list[np.ndarray]:
    return [np.sqrt(w) * PAULI_MATRICES[lab] for lab, w in zip(PAULI_LABELS, probs) if w > 0]


def kraus_of(ch: NoiseChannel) -> list[np.ndarray]:
    """Kraus operators of the channel. Zero-weight terms are dropped."""
    if ch.kind is ChannelKind.AMPLITUDE_DAMPING:
        return damping_kraus(ch.p)
    ops = pauli_kraus(pauli_probabilities(ch))
    return ops or [np.zeros((2, 2), dtype=complex)]


def apply_kraus(rho: np.ndarray, kraus: list[np.ndarray]) -> np.ndarray:
    """Single-qubit ρ -> Σ K ρ K†, symmetrized so the result is exactly Hermitian."""
    out = sum(k @ rho @ k.conj().T for k in kraus)
    return (out + out.conj().T) / 2


def sample_pauli(ch: NoiseChannel, rng: np.random.Generator) -> str:
    """Draw one Pauli label from the trajectory form of ``ch``."""
    if not is_clifford_compatible(ch):
        raise ValueError("amplitude damping is not Pauli-realizable")
    probs = pauli_probabilities(ch)
    u = rng.random()
    acc = 0.0
    last = "I"
    for lab, w in zip(PAULI_LABELS, probs):
        if w <= 0:
            continue
        acc += w
        last = lab
        if u < acc:
            return lab
    return last

"""Flatten a circuit plus a noise model into a step list for the simulators.

Steps are either :class:`Operation` objects or :class:`NoiseSite` markers.
Identity gates are dropped; the noise they carry is merged per qubit over
each run of consecutive identities, which is exact because Pauli channels
and amplitude damping each compose in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, Condition, GateKind, Operation
from .noise import ChannelKind, NoiseModel, compose_damping, compose_pauli, pauli_probabilities


@dataclass(frozen=True)
class NoiseSite:
    qubit: int
    pauli: tuple[float, float, float, float] | None = None  # (pI, pX, pY, pZ)
    gamma: float | None = None  # amplitude damping
    condition: Condition | None = None

    @property
    def is_damping(self) -> bool:
        return self.gamma is not None

    @property
    def is_trivial(self) -> bool:
        if self.gamma is not None:
            return self.gamma == 0.0
        return self.pauli[0] >= 1.0


Step = Operation | NoiseSite


def _site(model: NoiseModel, qubit: int, uses: int, condition: Condition | None = None) -> NoiseSite:
    ch = model.channel
    if ch.kind is ChannelKind.AMPLITUDE_DAMPING:
        return NoiseSite(qubit, gamma=compose_damping(ch.p, uses), condition=condition)
    return NoiseSite(qubit, pauli=compose_pauli(pauli_probabilities(ch), uses), condition=condition)


def build_schedule(c: Circuit, model: NoiseModel | None = None) -> list[Step]:
    noisy_model = model is not None and not model.is_noiseless
    steps: list[Step] = []
    idle: dict[int, int] = {}

    def flush():
        for q, m in idle.items():
            steps.append(_site(model, q, m))
        idle.clear()

    for op in c.ops:
        noisy = noisy_model and op.tag not in model.exempt_tags
        if op.kind is GateKind.I and op.condition is None:
            if noisy:
                idle[op.qubits[0]] = idle.get(op.qubits[0], 0) + 1
            continue
        flush()
        if op.kind is GateKind.MEASURE:
            if noisy and model.noisy_measurement:
                steps.append(_site(model, op.qubits[0], 1))
            steps.append(op)
            continue
        if op.kind is not GateKind.I:
            steps.append(op)
        if noisy:
            steps.extend(_site(model, q, 1, op.condition) for q in op.qubits)
    flush()
    return steps


def terminal_suffix_start(steps: list[Step]) -> int:
    """Index where the trailing run of measurements and unconditional noise begins.

    That suffix only flips, decays or reads basis states, so it can be
    sampled classically from the diagonal of the state. Each qubit is
    measured at most once inside the suffix, so the record is a function of
    the final basis state.
    """
    i = len(steps)
    measured: set[int] = set()
    while i > 0:
        s = steps[i - 1]
        if isinstance(s, NoiseSite):
            if s.condition is not None:
                break
        elif s.kind is GateKind.MEASURE and s.qubits[0] not in measured:
            measured.add(s.qubits[0])
        else:
            break
        i -= 1
    return i


def schedule_qubits(steps: list[Step]) -> int:
    """Highest qubit index touched plus one."""
    hi = -1
    for s in steps:
        qs = (s.qubit,) if isinstance(s, NoiseSite) else s.qubits
        hi = max(hi, *qs)
    return hi + 1

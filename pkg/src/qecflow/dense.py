"""Exact (density-matrix) and stochastic (trajectory) simulation.

Both engines walk the step list from :mod:`qecflow.schedule`. Classical
records are Python ints with bit ``i`` holding clbit ``i``.

The trajectory engine does not run shots one at a time. It carries a shot
count with each state and splits the count multinomially whenever noise or a
measurement branches, so shots that see the same history share one state
update. The sampled distribution is identical in law to independent shots.
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, Condition, GateKind, Operation, check
from .distribution import OutcomeDistribution, bits_to_key
from .noise import NoiseModel, damping_kraus, pauli_kraus
from .schedule import NoiseSite, Step, build_schedule, terminal_suffix_start
from .states import DensityMatrix, SparseState, StateVector

DENSITY_QUBIT_CAP = 10
TRAJECTORY_QUBIT_CAP = 24

_PAULI_KINDS = (None, GateKind.X, GateKind.Y, GateKind.Z)


class QubitCapError(ValueError):
    """Raised when a circuit is too wide for a dense representation."""


def _holds(cond: Condition | None, rec: int) -> bool:
    return cond is None or ((rec >> cond.start) & ((1 << cond.width) - 1)) == cond.value


def _set_bit(rec: int, c: int, bit: int) -> int:
    return rec | (1 << c) if bit else rec & ~(1 << c)


def _check_cap(c: Circuit, cap: int, what: str) -> None:
    if c.num_qubits > cap:
        raise QubitCapError(
            f"{what} backend is capped at {cap} qubits, circuit has {c.num_qubits} "
            "(memory grows exponentially; use the stabilizer backend for wide Clifford circuits)"
        )


# ---------------------------------------------------------------------------
# terminal suffix: measurements and classical noise on the computational basis


def _plan_suffix(steps: list[Step], start: int) -> tuple[list[tuple[str, int, float]], dict[int, int]]:
    """Classical actions ("flip"/"decay", qubit, prob) and the clbit -> qubit readout map."""
    read_qubits = {s.qubits[0] for s in steps[start:] if isinstance(s, Operation)}
    measured: set[int] = set()
    actions: list[tuple[str, int, float]] = []
    reads: dict[int, int] = {}
    for s in steps[start:]:
        if isinstance(s, NoiseSite):
            q = s.qubit
            if q in measured or q not in read_qubits:
                continue
            if s.is_damping:
                if s.gamma > 0:
                    actions.append(("decay", q, s.gamma))
            else:
                f = s.pauli[1] + s.pauli[2]
                if f > 0:
                    actions.append(("flip", q, f))
        else:
            measured.add(s.qubits[0])
            reads[s.clbits[0]] = s.qubits[0]
    return actions, reads


def _accumulate(out: dict[int, float], rec: int, reads: dict[int, int],
                basis: np.ndarray, weights: np.ndarray) -> None:
    for c in reads:
        rec &= ~(1 << c)
    if not reads:
        out[rec] = out.get(rec, 0.0) + float(weights.sum())
        return
    clbits = list(reads)
    cols = np.stack([((basis >> np.uint64(reads[c])) & np.uint64(1)).astype(np.uint8) for c in clbits], axis=1)
    uniq, inv = np.unique(cols, axis=0, return_inverse=True)
    w = np.bincount(inv.ravel(), weights=weights, minlength=len(uniq))
    for row, wt in zip(uniq.tolist(), w.tolist()):
        if wt > 0:
            r = rec
            for c, b in zip(clbits, row):
                if b:
                    r |= 1 << c
            out[r] = out.get(r, 0.0) + wt


def _classical_transform(p: np.ndarray, actions: list[tuple[str, int, float]]) -> np.ndarray:
    """Apply suffix flips and decays to a basis-probability vector."""
    p = p.copy()
    for act, q, x in actions:
        v = p.reshape(-1, 2, 1 << q)
        p0, p1 = v[:, 0, :].copy(), v[:, 1, :].copy()
        if act == "flip":
            v[:, 0, :] = (1 - x) * p0 + x * p1
            v[:, 1, :] = (1 - x) * p1 + x * p0
        else:
            v[:, 0, :] = p0 + x * p1
            v[:, 1, :] = (1 - x) * p1
    return p


# ---------------------------------------------------------------------------
# exact engine


def run_density(c: Circuit, nm: NoiseModel | None = None, *, max_qubits: int = DENSITY_QUBIT_CAP) -> OutcomeDistribution:
    """Exact output distribution.

    Mid-circuit measurements split the state into classically labelled
    branches that are later summed. Without noise the branches are sparse
    pure states, which keeps wide encoded circuits tractable; with noise they
    are density matrices and ``max_qubits`` applies.
    """
    check(c)
    steps = build_schedule(c, nm)
    if not any(isinstance(s, NoiseSite) and not s.is_trivial for s in steps):
        return _run_pure_exact(c, steps)
    _check_cap(c, max_qubits, "density-matrix")
    return _run_mixed_exact(c, steps)


def _run_pure_exact(c: Circuit, steps: list[Step]) -> OutcomeDistribution:
    n = c.num_qubits
    cut = terminal_suffix_start(steps)
    _, reads = _plan_suffix(steps, cut)
    branches: list[tuple[float, SparseState, int]] = [(1.0, SparseState(n), 0)]
    for s in steps[:cut]:
        if isinstance(s, NoiseSite):
            continue
        if s.kind.is_unitary:
            for _, st, rec in branches:
                if _holds(s.condition, rec):
                    st.apply_gate(s.kind, s.qubits)
            continue
        q = s.qubits[0]
        nxt = []
        for w, st, rec in branches:
            p1 = min(max(st.prob_one(q), 0.0), 1.0)
            outcomes = [b for b, pb in ((0, 1.0 - p1), (1, p1)) if pb > 1e-12]
            for b in outcomes:
                pb = p1 if b else 1.0 - p1
                br = st if len(outcomes) == 1 else st.copy()
                br.project(q, b)
                r = rec
                if s.kind is GateKind.MEASURE:
                    r = _set_bit(rec, s.clbits[0], b)
                elif b:
                    br.apply_gate(GateKind.X, (q,))
                nxt.append((w * pb, br, r))
        branches = nxt
    out: dict[int, float] = {}
    for w, st, rec in branches:
        idx, p = st.support()
        _accumulate(out, rec, reads, idx, w * p / p.sum())
    return OutcomeDistribution.from_weights({bits_to_key(r, c.num_clbits): v for r, v in out.items()})


def _noise_kraus(s: NoiseSite) -> list[np.ndarray]:
    return damping_kraus(s.gamma) if s.is_damping else pauli_kraus(s.pauli)


def _run_mixed_exact(c: Circuit, steps: list[Step]) -> OutcomeDistribution:
    n = c.num_qubits
    cut = terminal_suffix_start(steps)
    actions, reads = _plan_suffix(steps, cut)
    branches: dict[int, DensityMatrix] = {0: DensityMatrix(n)}
    for s in steps[:cut]:
        if isinstance(s, NoiseSite):
            if s.is_trivial:
                continue
            kraus = _noise_kraus(s)
            for rec, rho in branches.items():
                if _holds(s.condition, rec):
                    rho.apply_kraus(kraus, s.qubit)
            continue
        if s.kind.is_unitary:
            for rec, rho in branches.items():
                if _holds(s.condition, rec):
                    rho.apply_gate(s.kind, s.qubits)
            continue
        q = s.qubits[0]
        nxt: dict[int, DensityMatrix] = {}

        def put(rec: int, rho: DensityMatrix) -> None:
            if rho.trace() <= 1e-15:
                return
            if rec in nxt:
                nxt[rec].add(rho)
            else:
                nxt[rec] = rho

        for rec, rho in branches.items():
            one = rho.copy()
            one.project(q, 1)
            rho.project(q, 0)
            if s.kind is GateKind.MEASURE:
                put(_set_bit(rec, s.clbits[0], 0), rho)
                put(_set_bit(rec, s.clbits[0], 1), one)
            else:
                one.apply_gate(GateKind.X, (q,))
                rho.add(one)
                put(rec, rho)
        branches = nxt
    out: dict[int, float] = {}
    for rec, rho in branches.items():
        p = _classical_transform(rho.diagonal(), actions)
        nz = np.flatnonzero(p > 1e-300)
        _accumulate(out, rec, reads, nz.astype(np.uint64), p[nz])
    return OutcomeDistribution.from_weights({bits_to_key(r, c.num_clbits): v for r, v in out.items()})


def final_density_matrix(c: Circuit, nm: NoiseModel | None = None, *,
                         max_qubits: int = DENSITY_QUBIT_CAP) -> DensityMatrix:
    """Final state of a circuit without measurements or resets."""
    check(c)
    _check_cap(c, max_qubits, "density-matrix")
    rho = DensityMatrix(c.num_qubits)
    for s in build_schedule(c, nm):
        if isinstance(s, NoiseSite):
            if not s.is_trivial:
                rho.apply_kraus(_noise_kraus(s), s.qubit)
        elif not s.kind.is_unitary or s.condition is not None:
            raise ValueError("final_density_matrix needs a unitary, unconditioned circuit")
        else:
            rho.apply_gate(s.kind, s.qubits)
    return rho


def final_state_vector(c: Circuit, *, max_qubits: int = TRAJECTORY_QUBIT_CAP) -> StateVector:
    """Noiseless final state of a unitary, unconditioned circuit."""
    check(c)
    _check_cap(c, max_qubits, "state-vector")
    psi = StateVector(c.num_qubits)
    for op in c.ops:
        if not op.kind.is_unitary or op.condition is not None:
            raise ValueError("final_state_vector needs a unitary, unconditioned circuit")
        psi.apply_gate(op.kind, op.qubits)
    return psi


# ---------------------------------------------------------------------------
# trajectory engine


def run_trajectories(c: Circuit, nm: NoiseModel | None = None, shots: int = 2000, *,
                     seed: int | None = None, max_qubits: int = TRAJECTORY_QUBIT_CAP,
                     sparse: bool = False) -> OutcomeDistribution:
    """Sample ``shots`` noisy runs.

    Pauli noise is drawn as explicit Pauli gates. Amplitude damping takes the
    jump branch with its exact state-dependent probability and renormalizes.
    ``seed`` defaults to the noise model's seed. ``sparse`` stores only
    non-zero amplitudes, which pays off for encoded states and lifts the
    qubit cap.
    """
    check(c)
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if not sparse:
        _check_cap(c, max_qubits, "state-vector")
    if seed is None:
        seed = nm.seed if nm is not None else 0
    rng = np.random.default_rng(seed)
    steps = build_schedule(c, nm)
    cut = terminal_suffix_start(steps)
    actions, reads = _plan_suffix(steps, cut)
    n = c.num_qubits
    out: dict[int, float] = {}
    stack = [(SparseState(n) if sparse else StateVector(n), shots, 0, 0)]
    while stack:
        st, k, rec, pos = stack.pop()
        while pos < cut:
            s = steps[pos]
            pos += 1
            if isinstance(s, NoiseSite):
                if s.is_trivial or not _holds(s.condition, rec):
                    continue
                if s.is_damping:
                    pj = min(1.0, s.gamma * st.prob_one(s.qubit))
                    j = int(rng.binomial(k, pj)) if pj > 0 else 0
                    all_jump = j == k
                    if 0 < j < k:
                        other = st.copy()
                        other.damp(s.qubit, s.gamma, True)
                        stack.append((other, j, rec, pos))
                        k -= j
                    st.damp(s.qubit, s.gamma, all_jump)
                    continue
                probs = np.asarray(s.pauli)
                draws = rng.multinomial(k, probs / probs.sum())
                hit = [(kind, int(m)) for kind, m in zip(_PAULI_KINDS, draws) if m]
                for kind, m in hit[1:]:
                    other = st.copy()
                    other.apply_gate(kind, (s.qubit,))
                    stack.append((other, m, rec, pos))
                kind, k = hit[0]
                if kind is not None:
                    st.apply_gate(kind, (s.qubit,))
                continue
            if s.kind.is_unitary:
                if _holds(s.condition, rec):
                    st.apply_gate(s.kind, s.qubits)
                continue
            q = s.qubits[0]
            p1 = min(max(st.prob_one(q), 0.0), 1.0)
            k1 = int(rng.binomial(k, p1))
            if 0 < k1 < k:
                other = st.copy()
                other.project(q, 1)
                if s.kind is GateKind.MEASURE:
                    stack.append((other, k1, _set_bit(rec, s.clbits[0], 1), pos))
                else:
                    other.apply_gate(GateKind.X, (q,))
                    stack.append((other, k1, rec, pos))
                k -= k1
                b = 0
            else:
                b = 1 if k1 == k else 0
            st.project(q, b)
            if s.kind is GateKind.MEASURE:
                rec = _set_bit(rec, s.clbits[0], b)
            elif b:
                st.apply_gate(GateKind.X, (q,))
        _sample_terminal(st, k, rec, actions, reads, rng, out)
    counts = {bits_to_key(r, c.num_clbits): int(round(v)) for r, v in out.items()}
    return OutcomeDistribution.from_counts(counts)


def _sample_terminal(st, k: int, rec: int, actions, reads, rng: np.random.Generator,
                     out: dict[int, float]) -> None:
    idx, p = st.support()
    p = p / p.sum()
    if len(idx) == 1:
        basis_counts = np.array([k])
    else:
        basis_counts = rng.multinomial(k, p)
        keep = basis_counts > 0
        idx, basis_counts = idx[keep], basis_counts[keep]
    if not actions:
        _accumulate(out, rec, reads, idx, basis_counts.astype(float))
        return
    basis = np.repeat(idx, basis_counts)
    for act, q, x in actions:
        bit = np.uint64(1 << q)
        hit = rng.random(k) < x
        if act == "flip":
            basis[hit] ^= bit
        else:
            basis[hit & ((basis & bit) != 0)] &= ~bit
    _accumulate(out, rec, reads, basis, np.ones(k))


# ---------------------------------------------------------------------------
# fidelity


def _as_array(x) -> np.ndarray:
    if isinstance(x, StateVector):
        return x.amplitudes
    if isinstance(x, DensityMatrix):
        return x.matrix
    if isinstance(x, SparseState):
        return x.to_dense()
    return np.asarray(x, dtype=complex)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def state_fidelity(a, b) -> float:
    """Fidelity of two states given as vectors or density matrices.

    Pure/pure gives |<a|b>|^2, pure/mixed gives <a|rho|a>, and mixed/mixed
    uses the Uhlmann form (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
    """
    a, b = _as_array(a), _as_array(b)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.ndim == 1 and b.ndim == 1:
        f = abs(np.vdot(a, b)) ** 2
    elif a.ndim == 1 or b.ndim == 1:
        psi, rho = (a, b) if a.ndim == 1 else (b, a)
        f = np.vdot(psi, rho @ psi).real
    else:
        ra = _psd_sqrt(a)
        w = np.linalg.eigvalsh(ra @ b @ ra)
        f = np.sqrt(np.clip(w, 0, None)).sum() ** 2
    return float(min(1.0, max(0.0, f)))

"""Stabilizer-tableau simulation of Clifford circuits with Pauli noise.

Rows are bit-packed into uint64 words. All shots share one tableau
structure (the x/z bits): Clifford gates and measurements change it the same
way for every shot, and Pauli errors only change row signs. Each row's sign
is therefore stored as a shared base bit plus a per-shot delta, packed eight
shots per byte. A conditional non-Pauli gate whose condition differs across
shots splits the batch in two.
"""

from __future__ import annotations

import numpy as np

from .circuit import CLIFFORD_KINDS, Circuit, Condition, GateKind, Operation, check
from .distribution import OutcomeDistribution
from .noise import NoiseModel, is_clifford_compatible
from .schedule import NoiseSite, build_schedule

_ONE = np.uint64(1)


class StabilizerUnsupportedError(ValueError):
    pass


def _popsum(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).sum(axis=-1, dtype=np.int64)


def _phase_exponent(x1, z1, x2, z2) -> np.ndarray:
    """Exponent e (mod 4) with P1 P2 = i^e P3 for packed Paulis, ignoring signs."""
    plus = (x1 & ~z1 & x2 & z2) | (x1 & z1 & ~x2 & z2) | (~x1 & z1 & x2 & ~z2)
    minus = (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2) | (x1 & z1 & x2 & ~z2)
    return (_popsum(plus) - _popsum(minus)) % 4


def _pack(bits: np.ndarray) -> np.ndarray:
    return np.packbits(bits.astype(bool), bitorder="little")


def _unpack(packed: np.ndarray, shots: int) -> np.ndarray:
    return np.unpackbits(packed, count=shots, bitorder="little", axis=-1).astype(bool)


class Tableau:
    """Destabilizers in rows ``0..n-1``, stabilizers in ``n..2n-1``, scratch row ``2n``.

    ``shots`` independent sign vectors ride on one structure; with
    ``shots=1`` this is the textbook single-state tableau.
    """

    def __init__(self, num_qubits: int, shots: int = 1):
        n = num_qubits
        self.n = n
        self.shots = shots
        words = max(1, (n + 63) // 64)
        self.x = np.zeros((2 * n + 1, words), dtype=np.uint64)
        self.z = np.zeros((2 * n + 1, words), dtype=np.uint64)
        for q in range(n):
            w, b = divmod(q, 64)
            self.x[q, w] = _ONE << np.uint64(b)
            self.z[n + q, w] = _ONE << np.uint64(b)
        self.r = np.zeros(2 * n + 1, dtype=np.uint8)
        self.delta = np.zeros((2 * n + 1, (shots + 7) // 8), dtype=np.uint8)

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n, t.shots = self.n, self.shots
        t.x, t.z, t.r, t.delta = self.x.copy(), self.z.copy(), self.r.copy(), self.delta.copy()
        return t

    def select_shots(self, keep: np.ndarray) -> "Tableau":
        """Tableau restricted to the shots where ``keep`` is true."""
        t = self.copy()
        t.shots = int(keep.sum())
        t.delta = _pack_rows(_unpack(self.delta, self.shots)[:, keep])
        return t

    # -- columns ---------------------------------------------------------------

    @staticmethod
    def _loc(q: int) -> tuple[int, np.uint64]:
        w, b = divmod(q, 64)
        return w, np.uint64(b)

    def _col(self, m: np.ndarray, q: int) -> np.ndarray:
        w, b = self._loc(q)
        return (m[:, w] >> b) & _ONE

    # -- gates -----------------------------------------------------------------

    def apply(self, kind: GateKind, qubits: tuple[int, ...]) -> None:
        if kind is GateKind.I:
            return
        if kind not in CLIFFORD_KINDS:
            raise StabilizerUnsupportedError(f"{kind.value} gate is unsupported by stabilizer backend")
        if kind is GateKind.CZ:
            a, b = qubits
            self._h(b)
            self._cx(a, b)
            self._h(b)
            return
        if kind is GateKind.CX:
            self._cx(*qubits)
            return
        q = qubits[0]
        xa, za = self._col(self.x, q), self._col(self.z, q)
        if kind is GateKind.H:
            self._h(q)
        elif kind is GateKind.S:
            self.r ^= (xa & za).astype(np.uint8)
            w, b = self._loc(q)
            self.z[:, w] ^= xa << b
        elif kind is GateKind.SDG:
            self.r ^= (xa & (za ^ _ONE)).astype(np.uint8)
            w, b = self._loc(q)
            self.z[:, w] ^= xa << b
        elif kind is GateKind.X:
            self.r ^= za.astype(np.uint8)
        elif kind is GateKind.Z:
            self.r ^= xa.astype(np.uint8)
        elif kind is GateKind.Y:
            self.r ^= (xa ^ za).astype(np.uint8)

    def _h(self, q: int) -> None:
        xa, za = self._col(self.x, q), self._col(self.z, q)
        self.r ^= (xa & za).astype(np.uint8)
        w, b = self._loc(q)
        d = (xa ^ za) << b
        self.x[:, w] ^= d
        self.z[:, w] ^= d

    def _cx(self, a: int, t: int) -> None:
        xa, za = self._col(self.x, a), self._col(self.z, a)
        xb, zb = self._col(self.x, t), self._col(self.z, t)
        self.r ^= (xa & zb & (xb ^ za ^ _ONE)).astype(np.uint8)
        wa, ba = self._loc(a)
        wb, bb = self._loc(t)
        self.x[:, wb] ^= xa << bb
        self.z[:, wa] ^= zb << ba

    def apply_pauli_masks(self, q: int, x_shots: np.ndarray | None, z_shots: np.ndarray | None) -> None:
        """Apply X to the packed shot set ``x_shots`` and Z to ``z_shots``."""
        rows = slice(0, 2 * self.n)
        if x_shots is not None:
            hit = self._col(self.z, q)[rows].astype(bool)
            self.delta[:2 * self.n][hit] ^= x_shots
        if z_shots is not None:
            hit = self._col(self.x, q)[rows].astype(bool)
            self.delta[:2 * self.n][hit] ^= z_shots

    # -- measurement -----------------------------------------------------------

    def measure(self, q: int, rng: np.random.Generator) -> np.ndarray:
        """Measure Z on ``q`` for every shot; returns packed outcome bits.

        A deterministic outcome consumes no randomness.
        """
        n = self.n
        xcol = self._col(self.x, q)[:2 * n].astype(bool)
        anti = np.flatnonzero(xcol[n:])
        if anti.size == 0:
            rows = n + np.flatnonzero(xcol[:n])
            return self._product_sign(rows)
        p = n + int(anti[0])
        rows = np.flatnonzero(xcol)
        rows = rows[(rows != p) & (rows != p - n)]
        if rows.size:
            e = _phase_exponent(self.x[rows], self.z[rows], self.x[p], self.z[p])
            self.r[rows] ^= self.r[p] ^ (e == 2).astype(np.uint8)
            self.delta[rows] ^= self.delta[p]
            self.x[rows] ^= self.x[p]
            self.z[rows] ^= self.z[p]
        d = p - n
        self.x[d], self.z[d], self.r[d], self.delta[d] = self.x[p], self.z[p], self.r[p], self.delta[p]
        w, b = self._loc(q)
        self.x[p] = 0
        self.z[p] = 0
        self.z[p, w] = _ONE << b
        self.r[p] = 0
        outcome = _pack(rng.integers(0, 2, size=self.shots))
        self.delta[p] = outcome
        return outcome

    def _product_sign(self, rows: np.ndarray) -> np.ndarray:
        """Packed per-shot sign of the ordered product of ``rows``."""
        if rows.size == 0:
            return np.zeros(self.delta.shape[1], dtype=np.uint8)
        xs, zs = self.x[rows], self.z[rows]
        px = np.bitwise_xor.accumulate(xs, axis=0)
        pz = np.bitwise_xor.accumulate(zs, axis=0)
        e = int(_phase_exponent(px[:-1], pz[:-1], xs[1:], zs[1:]).sum()) % 4 if rows.size > 1 else 0
        base = (int(self.r[rows].sum()) + e // 2) & 1
        sign = np.bitwise_xor.reduce(self.delta[rows], axis=0)
        return sign ^ np.uint8(0xFF) if base else sign

    # -- inspection ------------------------------------------------------------

    def pauli_rows(self, shot: int = 0) -> list[str]:
        """Rows as signed Pauli strings for one shot (character ``k`` is qubit ``k``)."""
        out = []
        deltas = _unpack(self.delta, self.shots)[:, shot]
        for i in range(2 * self.n):
            xs = self._row_bits(self.x[i])
            zs = self._row_bits(self.z[i])
            body = "".join("IXZY"[int(a) + 2 * int(b)] for a, b in zip(xs, zs))
            out.append(("-" if self.r[i] ^ deltas[i] else "+") + body)
        return out

    def stabilizers(self, shot: int = 0) -> list[str]:
        return self.pauli_rows(shot)[self.n:]

    def _row_bits(self, words: np.ndarray) -> np.ndarray:
        bits = np.unpackbits(words.view(np.uint8), bitorder="little")
        return bits[:self.n]

    def check_invariants(self) -> None:
        """Raise if the symplectic structure is broken."""
        n = self.n
        x, z = self.x[:2 * n], self.z[:2 * n]
        sym = _popsum(x[:, None, :] & z[None, :, :]) + _popsum(z[:, None, :] & x[None, :, :])
        sym = sym % 2
        want = np.zeros((2 * n, 2 * n), dtype=np.int64)
        want[np.arange(n), n + np.arange(n)] = 1
        want[n + np.arange(n), np.arange(n)] = 1
        if not np.array_equal(sym, want):
            raise AssertionError("tableau symplectic invariants violated")


def _pack_rows(bits: np.ndarray) -> np.ndarray:
    return np.packbits(bits, axis=-1, bitorder="little")


def apply_clifford(t: Tableau, op: Operation) -> Tableau:
    """Apply a Clifford gate in place and return the tableau."""
    if not op.kind.is_unitary:
        raise ValueError(f"{op.kind.value} is not a gate")
    t.apply(op.kind, op.qubits)
    return t


def measure(t: Tableau, q: int, rng: np.random.Generator) -> tuple[int | np.ndarray, Tableau]:
    """Measure qubit ``q``. A single-shot tableau yields an int, otherwise a bool array."""
    bits = _unpack(t.measure(q, rng), t.shots)
    return (int(bits[0]) if t.shots == 1 else bits), t


# ---------------------------------------------------------------------------
# circuit runner


class _Batch:
    def __init__(self, tab: Tableau, records: np.ndarray):
        self.tab = tab
        self.records = records  # (num_clbits, packed shots)

    @property
    def shots(self) -> int:
        return self.tab.shots

    def condition_mask(self, cond: Condition | None) -> np.ndarray | None:
        """Packed mask of shots meeting ``cond``; ``None`` means all."""
        if cond is None:
            return None
        mask = np.full(self.records.shape[1], 0xFF, dtype=np.uint8)
        for k, c in enumerate(cond.clbits):
            row = self.records[c]
            mask &= row if (cond.value >> k) & 1 else ~row
        return mask

    def split(self, keep: np.ndarray) -> "_Batch":
        recs = _unpack(self.records, self.shots)[:, keep]
        return _Batch(self.tab.select_shots(keep), _pack_rows(recs))


def _check_stabilizer_compatible(c: Circuit, nm: NoiseModel | None) -> None:
    bad = sorted({op.kind.value for op in c.ops if op.kind.is_unitary and op.kind not in CLIFFORD_KINDS})
    if bad:
        raise StabilizerUnsupportedError(f"gate(s) {', '.join(bad)} unsupported by stabilizer backend")
    if nm is not None and not nm.is_noiseless and not is_clifford_compatible(nm.channel):
        raise StabilizerUnsupportedError(
            f"{nm.channel.kind.value} noise cannot be simulated with the stabilizer backend; "
            "amplitude damping requires a dense backend (use trajectories)"
        )


def run_stabilizer(c: Circuit, nm: NoiseModel | None = None, shots: int = 2000, *,
                   seed: int | None = None, check_every_step: bool = False) -> OutcomeDistribution:
    """Sample ``shots`` runs of a Clifford circuit under Pauli noise."""
    check(c)
    _check_stabilizer_compatible(c, nm)
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if seed is None:
        seed = nm.seed if nm is not None else 0
    rng = np.random.default_rng(seed)
    nbytes = (shots + 7) // 8
    batches = [_Batch(Tableau(c.num_qubits, shots), np.zeros((c.num_clbits, nbytes), dtype=np.uint8))]
    for s in build_schedule(c, nm):
        nxt = []
        for b in batches:
            nxt.extend(_step(b, s, rng))
        batches = nxt
        if check_every_step:
            for b in batches:
                b.tab.check_invariants()
    counts: dict[str, int] = {}
    for b in batches:
        b.tab.check_invariants()
        bits = _unpack(b.records, b.shots).T.astype(np.uint8)
        if bits.shape[1] == 0:
            counts[""] = counts.get("", 0) + b.shots
            continue
        uniq, cnt = np.unique(bits, axis=0, return_counts=True)
        for row, k in zip(uniq, cnt.tolist()):
            key = "".join("1" if v else "0" for v in row.tolist())
            counts[key] = counts.get(key, 0) + k
    return OutcomeDistribution.from_counts(counts)


def _step(b: _Batch, s, rng: np.random.Generator) -> list[_Batch]:
    tab = b.tab
    if isinstance(s, NoiseSite):
        if s.is_trivial:
            return [b]
        _, px, py, pz = s.pauli
        perr = px + py + pz
        k = int(rng.binomial(b.shots, min(1.0, perr)))
        if k == 0:
            return [b]
        hit = rng.choice(b.shots, size=k, replace=False)
        labels = rng.choice(3, size=k, p=np.array([px, py, pz]) / perr)
        mx = np.zeros(b.shots, dtype=bool)
        mz = np.zeros(b.shots, dtype=bool)
        mx[hit[labels <= 1]] = True
        mz[hit[labels >= 1]] = True
        cmask = b.condition_mask(s.condition)
        px_mask, pz_mask = _pack(mx), _pack(mz)
        if cmask is not None:
            px_mask &= cmask
            pz_mask &= cmask
        tab.apply_pauli_masks(s.qubit, px_mask if mx.any() else None, pz_mask if mz.any() else None)
        return [b]
    op: Operation = s
    if op.kind is GateKind.MEASURE:
        b.records[op.clbits[0]] = tab.measure(op.qubits[0], rng)
        return [b]
    if op.kind is GateKind.RESET:
        out = tab.measure(op.qubits[0], rng)
        tab.apply_pauli_masks(op.qubits[0], out, None)
        return [b]
    cmask = b.condition_mask(op.condition)
    if cmask is None:
        tab.apply(op.kind, op.qubits)
        return [b]
    sel = _unpack(cmask, b.shots)
    if not sel.any():
        return [b]
    if sel.all():
        tab.apply(op.kind, op.qubits)
        return [b]
    if op.kind.is_pauli:
        q = op.qubits[0]
        xm = cmask if op.kind in (GateKind.X, GateKind.Y) else None
        zm = cmask if op.kind in (GateKind.Z, GateKind.Y) else None
        tab.apply_pauli_masks(q, xm, zm)
        return [b]
    on, off = b.split(sel), b.split(~sel)
    on.tab.apply(op.kind, op.qubits)
    return [on, off]

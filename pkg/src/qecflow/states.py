"""State containers used by the dense simulators.

Qubit ``q`` is bit ``q`` of a basis-state index.
"""

from __future__ import annotations

import numpy as np

from .circuit import GateKind

SQRT_HALF = np.sqrt(0.5)

GATE_MATRICES = {
    GateKind.I: np.eye(2, dtype=complex),
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF,
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.SDG: np.array([[1, 0], [0, -1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
}

_PHASES = {GateKind.Z: -1.0, GateKind.S: 1j, GateKind.SDG: -1j, GateKind.T: np.exp(1j * np.pi / 4)}


class StateVector:
    """Dense amplitude vector of length ``2**num_qubits``."""

    def __init__(self, num_qubits: int, amplitudes: np.ndarray | None = None):
        self.num_qubits = num_qubits
        if amplitudes is None:
            amplitudes = np.zeros(1 << num_qubits, dtype=complex)
            amplitudes[0] = 1.0
        self.amplitudes = np.asarray(amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << num_qubits,):
            raise ValueError(f"expected {1 << num_qubits} amplitudes, got {self.amplitudes.shape}")

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def _split(self, q: int) -> np.ndarray:
        return self.amplitudes.reshape(-1, 2, 1 << q)

    def _split2(self, a: int, b: int) -> tuple[np.ndarray, bool]:
        lo, hi = (a, b) if a < b else (b, a)
        v = self.amplitudes.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
        return v, a > b  # axis 1 is `hi`, axis 3 is `lo`

    def apply_gate(self, kind: GateKind, qubits: tuple[int, ...]) -> None:
        if kind is GateKind.I:
            return
        if kind is GateKind.CX:
            c, t = qubits
            v, c_high = self._split2(c, t)
            if c_high:
                a, b = v[:, 1, :, 0, :], v[:, 1, :, 1, :]
            else:
                a, b = v[:, 0, :, 1, :], v[:, 1, :, 1, :]
            tmp = a.copy()
            a[...] = b
            b[...] = tmp
            return
        if kind is GateKind.CZ:
            v, _ = self._split2(*qubits)
            v[:, 1, :, 1, :] *= -1
            return
        q = qubits[0]
        v = self._split(q)
        if kind in _PHASES:
            v[:, 1, :] *= _PHASES[kind]
        elif kind is GateKind.X:
            tmp = v[:, 0, :].copy()
            v[:, 0, :] = v[:, 1, :]
            v[:, 1, :] = tmp
        elif kind is GateKind.Y:
            tmp = v[:, 0, :].copy()
            v[:, 0, :] = -1j * v[:, 1, :]
            v[:, 1, :] = 1j * tmp
        elif kind is GateKind.H:
            a0 = v[:, 0, :].copy()
            a1 = v[:, 1, :]
            v[:, 0, :] = (a0 + a1) * SQRT_HALF
            v[:, 1, :] = (a0 - a1) * SQRT_HALF
        else:
            raise ValueError(f"cannot apply {kind.value} as a gate")

    def apply_matrix(self, u: np.ndarray, q: int) -> None:
        v = self._split(q)
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :].copy()
        v[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
        v[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1

    def prob_one(self, q: int) -> float:
        a1 = self._split(q)[:, 1, :]
        return float(np.vdot(a1, a1).real)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalize(self) -> None:
        self.amplitudes /= np.sqrt(self.norm_sq())

    def project(self, q: int, bit: int) -> None:
        """Collapse qubit ``q`` onto ``bit`` and renormalize."""
        self._split(q)[:, 1 - bit, :] = 0
        self.normalize()

    def damp(self, q: int, gamma: float, jump: bool) -> None:
        """Apply one amplitude-damping Kraus branch and renormalize."""
        v = self._split(q)
        if jump:
            v[:, 0, :] = v[:, 1, :]
            v[:, 1, :] = 0
        else:
            v[:, 1, :] *= np.sqrt(1.0 - gamma)
        self.normalize()

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        p = np.abs(self.amplitudes) ** 2
        nz = np.flatnonzero(p > 1e-300)
        return nz.astype(np.uint64), p[nz]


class SparseState:
    """Pure state stored as (basis index, amplitude) pairs.

    Cost scales with the number of non-zero amplitudes rather than with
    ``2**num_qubits``. Encoded stabilizer states have few terms, so this is
    the representation of choice for noiseless checks of compiled circuits.
    """

    MAX_QUBITS = 63

    def __init__(self, num_qubits: int, idx: np.ndarray | None = None, amp: np.ndarray | None = None):
        if num_qubits > self.MAX_QUBITS:
            raise ValueError(f"sparse state supports at most {self.MAX_QUBITS} qubits")
        self.num_qubits = num_qubits
        self.idx = np.zeros(1, dtype=np.uint64) if idx is None else idx
        self.amp = np.ones(1, dtype=complex) if amp is None else amp

    def copy(self) -> "SparseState":
        return SparseState(self.num_qubits, self.idx.copy(), self.amp.copy())

    @staticmethod
    def _mask(q: int) -> np.uint64:
        return np.uint64(1 << q)

    def _bit(self, q: int) -> np.ndarray:
        return (self.idx & self._mask(q)) != 0

    def _merge(self, idx: np.ndarray, amp: np.ndarray) -> None:
        uniq, inv = np.unique(idx, return_inverse=True)
        if len(uniq) == len(idx):
            order = np.argsort(idx, kind="stable")
            idx, amp = idx[order], amp[order]
        else:
            re = np.bincount(inv, weights=amp.real, minlength=len(uniq))
            im = np.bincount(inv, weights=amp.imag, minlength=len(uniq))
            idx, amp = uniq, re + 1j * im
        keep = np.abs(amp) > 1e-14
        self.idx, self.amp = idx[keep], amp[keep]

    def apply_gate(self, kind: GateKind, qubits: tuple[int, ...]) -> None:
        if kind is GateKind.I:
            return
        if kind is GateKind.CX:
            c, t = qubits
            flip = ((self.idx >> np.uint64(c)) & np.uint64(1)) << np.uint64(t)
            self.idx = self.idx ^ flip
            return
        if kind is GateKind.CZ:
            a, b = qubits
            self.amp = np.where(self._bit(a) & self._bit(b), -self.amp, self.amp)
            return
        q = qubits[0]
        if kind in _PHASES:
            self.amp = np.where(self._bit(q), self.amp * _PHASES[kind], self.amp)
        elif kind is GateKind.X:
            self.idx = self.idx ^ self._mask(q)
        elif kind is GateKind.Y:
            self.amp = self.amp * np.where(self._bit(q), -1j, 1j)
            self.idx = self.idx ^ self._mask(q)
        elif kind is GateKind.H:
            m = self._mask(q)
            bit = self._bit(q)
            idx = np.concatenate([self.idx & ~m, self.idx | m])
            amp = np.concatenate([self.amp, np.where(bit, -self.amp, self.amp)]) * SQRT_HALF
            self._merge(idx, amp)
        else:
            raise ValueError(f"cannot apply {kind.value} as a gate")

    def apply_matrix(self, u: np.ndarray, q: int) -> None:
        m = self._mask(q)
        bit = self._bit(q).astype(int)
        out0 = u[0, bit] * self.amp
        out1 = u[1, bit] * self.amp
        self._merge(np.concatenate([self.idx & ~m, self.idx | m]), np.concatenate([out0, out1]))

    def prob_one(self, q: int) -> float:
        a = self.amp[self._bit(q)]
        return float(np.vdot(a, a).real)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amp, self.amp).real)

    def normalize(self) -> None:
        self.amp = self.amp / np.sqrt(self.norm_sq())

    def project(self, q: int, bit: int) -> None:
        keep = self._bit(q) == bool(bit)
        self.idx, self.amp = self.idx[keep], self.amp[keep]
        self.normalize()

    def damp(self, q: int, gamma: float, jump: bool) -> None:
        bit = self._bit(q)
        if jump:
            self.idx, self.amp = self.idx[bit] & ~self._mask(q), self.amp[bit]
        else:
            self.amp = np.where(bit, self.amp * np.sqrt(1.0 - gamma), self.amp)
        self.normalize()

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        return self.idx, np.abs(self.amp) ** 2

    def to_dense(self) -> np.ndarray:
        out = np.zeros(1 << self.num_qubits, dtype=complex)
        out[self.idx.astype(np.int64)] = self.amp
        return out


class DensityMatrix:
    """Density matrix stored as a 2n-qubit vector: column index in the low
    ``n`` bits, row index in the high ``n`` bits. The trace is not forced to
    one so that measurement branches can carry their own weight."""

    def __init__(self, num_qubits: int, matrix: np.ndarray | None = None):
        self.num_qubits = num_qubits
        dim = 1 << num_qubits
        if matrix is None:
            matrix = np.zeros((dim, dim), dtype=complex)
            matrix[0, 0] = 1.0
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix, got {matrix.shape}")
        self._vec = StateVector(2 * num_qubits, matrix.reshape(-1).copy())

    @property
    def matrix(self) -> np.ndarray:
        dim = 1 << self.num_qubits
        return self._vec.amplitudes.reshape(dim, dim)

    def copy(self) -> "DensityMatrix":
        out = DensityMatrix.__new__(DensityMatrix)
        out.num_qubits = self.num_qubits
        out._vec = self._vec.copy()
        return out

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def apply_gate(self, kind: GateKind, qubits: tuple[int, ...]) -> None:
        n = self.num_qubits
        if kind is GateKind.I:
            return
        if kind in (GateKind.CX, GateKind.CZ):
            self._vec.apply_gate(kind, tuple(q + n for q in qubits))
            self._vec.apply_gate(kind, qubits)
            return
        self.apply_matrix(GATE_MATRICES[kind], qubits[0])

    def apply_matrix(self, u: np.ndarray, q: int) -> None:
        self._vec.apply_matrix(u, q + self.num_qubits)
        self._vec.apply_matrix(u.conj(), q)

    def apply_kraus(self, kraus: list[np.ndarray], q: int) -> None:
        acc = None
        for k in kraus:
            part = self.copy()
            part.apply_matrix(k, q)
            acc = part._vec.amplitudes if acc is None else acc + part._vec.amplitudes
        self._vec.amplitudes = acc

    def prob_one(self, q: int) -> float:
        d = np.diagonal(self.matrix).real
        idx = np.arange(len(d))
        return float(d[(idx >> q) & 1 == 1].sum())

    def project(self, q: int, bit: int) -> None:
        """P ρ P without renormalization."""
        n = self.num_qubits
        v = self._vec
        v._split(q + n)[:, 1 - bit, :] = 0
        v._split(q)[:, 1 - bit, :] = 0

    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.matrix).real.copy()

    def add(self, other: "DensityMatrix") -> None:
        self._vec.amplitudes += other._vec.amplitudes

"""Parameter sweeps behind the fidelity and runtime studies, plus CSV I/O."""

from __future__ import annotations

import csv
import io
import logging
import statistics
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .backends import check_compatible, resolve_backend, simulate
from .circuit import Circuit, GateKind, gate, ghz_benchmark, measure, pad_dummy_ops
from .compiler import CORRECT, DECODE, ENCODE, EccConfig, apply_ecc
from .dense import DENSITY_QUBIT_CAP, TRAJECTORY_QUBIT_CAP, run_density, run_trajectories
from .distribution import OutcomeDistribution
from .metrics import hellinger_coefficient
from .noise import (NoiseChannel, NoiseModel, amplitude_damping, bit_flip,
                    depolarizing)
from .stabilizer import run_stabilizer

log = logging.getLogger(__name__)

BENCHMARKS: dict[str, Callable[[int], Circuit]] = {"ghz": ghz_benchmark}
SWEEP_PARAMS = ("dummy_ops", "correction_frequency", "p", "qubits")

# Defaults for the fidelity studies: GHZ-5, Steane code, depolarizing noise on
# every qubit use, correction every 500 uses, 10000 dummy ops, 2000 shots.
DEFAULT_P = 1e-5
DEFAULT_FREQUENCY = 500
DEFAULT_DUMMY_OPS = 10000
DEFAULT_SHOTS = 2000
DEFAULT_QUBITS = 5


def derive_seed(base: int, index: int) -> int:
    """Independent per-row seed from a base seed."""
    return int(np.random.SeedSequence([int(base), int(index)]).generate_state(1)[0])


@dataclass
class SweepRow:
    value: float
    series: tuple[float | None, ...]
    shots: int | None = None
    seed: int | None = None
    wall_time: float = 0.0


@dataclass
class SweepResult:
    """Rows of one sweep; ``columns[0]`` names the swept value, the rest name ``series``."""

    name: str
    columns: tuple[str, ...]
    rows: list[SweepRow] = field(default_factory=list)

    def column(self, name: str) -> list[float | None]:
        k = self.columns.index(name)
        if k == 0:
            return [r.value for r in self.rows]
        return [r.series[k - 1] for r in self.rows]

    @property
    def values(self) -> list[float]:
        return [r.value for r in self.rows]


@dataclass(frozen=True)
class ExperimentSpec:
    """One swept fidelity experiment.

    ``ecc=None`` skips the protected series. The noise model's seed is the
    base seed for every row.
    """

    sweep_param: str
    sweep_values: tuple[float, ...]
    benchmark: str = "ghz"
    qubits: int = DEFAULT_QUBITS
    ecc: EccConfig | None = field(default_factory=lambda: EccConfig("steane7", DEFAULT_FREQUENCY))
    noise: NoiseModel = field(default_factory=lambda: depolarizing(DEFAULT_P))
    backend: str = "stabilizer"
    shots: int = DEFAULT_SHOTS
    dummy_ops: int = DEFAULT_DUMMY_OPS
    sparse: bool = False  # sparse state for the trajectory backend
    name: str = "sweep"

    def __post_init__(self):
        if self.sweep_param not in SWEEP_PARAMS:
            raise ValueError(f"sweep parameter must be one of {', '.join(SWEEP_PARAMS)}")
        if not self.sweep_values:
            raise ValueError("sweep needs at least one value")
        if self.benchmark not in BENCHMARKS:
            raise ValueError(f"unknown benchmark {self.benchmark!r}")
        if self.sweep_param == "correction_frequency" and self.ecc is None:
            raise ValueError("correction-frequency sweep needs an ECC configuration")
        check_compatible(resolve_backend(self.backend), self.noise)

    def at(self, value: float) -> "ExperimentSpec":
        """Copy with the swept parameter fixed to ``value``."""
        if self.sweep_param == "dummy_ops":
            return replace(self, dummy_ops=int(value))
        if self.sweep_param == "qubits":
            return replace(self, qubits=int(value))
        if self.sweep_param == "correction_frequency":
            return replace(self, ecc=replace(self.ecc, correction_frequency=int(value)))
        ch = NoiseChannel(self.noise.channel.kind, float(value))
        return replace(self, noise=replace(self.noise, channel=ch))


def build_benchmark(spec: ExperimentSpec) -> Circuit:
    return pad_dummy_ops(BENCHMARKS[spec.benchmark](spec.qubits), spec.dummy_ops)


def _fidelity(c: Circuit, reference: OutcomeDistribution, spec: ExperimentSpec, seed: int) -> float:
    nm = replace(spec.noise, seed=seed)
    dist = simulate(c, nm, spec.backend, spec.shots, seed, sparse=spec.sparse)
    if dist.width != reference.width:
        dist = dist.marginal(range(reference.width))
    return hellinger_coefficient(dist, reference)


def run_sweep(spec: ExperimentSpec, progress: Callable[[str], None] | None = None) -> SweepResult:
    """Fidelity with and without ECC for each sweep value.

    The reference is the exact noiseless distribution of the unprotected
    circuit.
    """
    result = SweepResult(spec.name, (spec.sweep_param, "withProtection", "noProtection"))
    base = spec.noise.seed
    for i, value in enumerate(spec.sweep_values):
        point = spec.at(value)
        seed = derive_seed(base, i)
        t0 = time.perf_counter()
        bench = build_benchmark(point)
        reference = run_density(bench)
        f_plain = _fidelity(bench, reference, point, seed)
        f_ecc = None
        if point.ecc is not None:
            f_ecc = _fidelity(apply_ecc(bench, point.ecc), reference, point, seed)
        wall = time.perf_counter() - t0
        result.rows.append(SweepRow(float(value), (f_ecc, f_plain), point.shots, seed, wall))
        if progress:
            progress(f"{spec.name}: {spec.sweep_param}={value} ecc={f_ecc} plain={f_plain} "
                     f"seed={seed} ({wall:.2f}s)")
    return result


def _relabel(r: SweepResult, name: str, columns: tuple[str, ...], order: tuple[int, ...]) -> SweepResult:
    rows = [SweepRow(x.value, tuple(x.series[k] for k in order), x.shots, x.seed, x.wall_time) for x in r.rows]
    return SweepResult(name, columns, rows)


# ---------------------------------------------------------------------------
# fidelity vs channel error probability for the three-qubit bit-flip code

FIG3_GRID = (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)
IDEAL_EXEMPT = frozenset({ENCODE, CORRECT, DECODE})


def idle_channel_circuit() -> Circuit:
    """|0>, one noisy idle step, readout."""
    return Circuit(1, 1, (gate(GateKind.I, 0), measure(0, 0)), "idle")


def fig3_study(p_grid: Sequence[float] = FIG3_GRID, shots: int = DEFAULT_SHOTS, seed: int = 0,
               progress: Callable[[str], None] | None = None) -> SweepResult:
    """Fidelity of |0> after a bit-flip channel: bare, ideally protected, realistically protected.

    Fidelity is the probability of reading 0, which equals <0|rho|0> of the
    decoded qubit. The ideal scenario exempts encoder, syndrome block and
    decoder from noise so only the protected idle step is noisy.
    """
    bare = idle_channel_circuit()
    protected = apply_ecc(bare, EccConfig("bitflip3", correction_frequency=10**9))
    result = SweepResult("fig3", ("ErrorProb", "NoECC", "BitflipIdeal", "BitflipRealistic"))
    for i, p in enumerate(p_grid):
        s = derive_seed(seed, i)
        t0 = time.perf_counter()
        quiet = bit_flip(p, s, noisy_measurement=False)
        ideal = bit_flip(p, s, noisy_measurement=False, exempt_tags=IDEAL_EXEMPT)
        real = bit_flip(p, s)
        f_bare = run_trajectories(bare, quiet, shots)["0"]
        f_ideal = run_trajectories(protected, ideal, shots).marginal([0])["0"]
        f_real = run_trajectories(protected, real, shots).marginal([0])["0"]
        wall = time.perf_counter() - t0
        result.rows.append(SweepRow(float(p), (f_bare, f_ideal, f_real), shots, s, wall))
        if progress:
            progress(f"fig3: p={p} bare={f_bare} ideal={f_ideal} realistic={f_real} seed={s}")
    return result


def fig3_analytic(p: float) -> tuple[float, float]:
    """(bare, ideal) fidelities: 1-p and 1-3p^2+2p^3."""
    return 1 - p, 1 - 3 * p**2 + 2 * p**3


# ---------------------------------------------------------------------------
# runtime scaling of the three simulators

FIG5_GRID = (2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 50, 100, 150, 200)


def _median_time(fn: Callable[[], object], repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def fig5_study(n_grid: Sequence[int] = FIG5_GRID, shots: int = DEFAULT_SHOTS, p: float = DEFAULT_P,
               seed: int = 0, repeats: int = 3, density_cap: int = DENSITY_QUBIT_CAP,
               trajectory_cap: int = TRAJECTORY_QUBIT_CAP,
               progress: Callable[[str], None] | None = None) -> SweepResult:
    """Median wall time (seconds) per backend on noisy GHZ-n; ``None`` past a backend's cap."""
    if list(n_grid) != sorted(n_grid):
        raise ValueError("qubit grid must be ascending")
    result = SweepResult("fig5", ("qubit", "density", "stoch", "stab"))
    for i, n in enumerate(n_grid):
        s = derive_seed(seed, i)
        c = ghz_benchmark(n)
        nm = depolarizing(p, s)
        t_den = _median_time(lambda: run_density(c, nm, max_qubits=density_cap), repeats) if n <= density_cap else None
        t_traj = (_median_time(lambda: run_trajectories(c, nm, shots, max_qubits=trajectory_cap), repeats)
                  if n <= trajectory_cap else None)
        t_stab = _median_time(lambda: run_stabilizer(c, nm, shots), repeats)
        result.rows.append(SweepRow(float(n), (t_den, t_traj, t_stab), shots, s, 0.0))
        if progress:
            progress(f"fig5: n={n} density={t_den} stoch={t_traj} stab={t_stab}")
    return result


# ---------------------------------------------------------------------------
# fidelity vs circuit depth, correction frequency and error probability

FIG6A_DEPTHS = (0, 4000, 8000, 12000, 16000, 20000)
FIG6B_FREQUENCIES = (10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000)
# At p=1e-5 the depth-0 ordering of the two series is within shot noise, so
# the depth and frequency studies run at 1e-4. The error-probability study
# uses a shallower circuit so the unprotected curve is not saturated at 1e-3.
FIG6A_P = 1e-4
FIG6B_P = 1e-4
FIG6C_GRID = (1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 2e-3)
FIG6C_DUMMY_OPS = 1000
FIG6C_FREQUENCY = 100


def fig6a_study(depths: Sequence[int] = FIG6A_DEPTHS, p: float = FIG6A_P, seed: int = 0,
                shots: int = DEFAULT_SHOTS, frequency: int = DEFAULT_FREQUENCY, qubits: int = DEFAULT_QUBITS,
                progress=None) -> SweepResult:
    spec = ExperimentSpec("dummy_ops", tuple(depths), qubits=qubits,
                          ecc=EccConfig("steane7", frequency), noise=depolarizing(p, seed),
                          shots=shots, name="fig6a")
    r = run_sweep(spec, progress)
    return _relabel(r, "fig6a", ("depth", "noProtection", "withProtection"), (1, 0))


def fig6b_study(frequencies: Sequence[int] = FIG6B_FREQUENCIES, p: float = FIG6B_P, seed: int = 0,
                shots: int = DEFAULT_SHOTS, dummy_ops: int = DEFAULT_DUMMY_OPS, qubits: int = DEFAULT_QUBITS,
                progress=None) -> SweepResult:
    spec = ExperimentSpec("correction_frequency", tuple(frequencies), qubits=qubits,
                          ecc=EccConfig("steane7", DEFAULT_FREQUENCY), noise=depolarizing(p, seed),
                          shots=shots, dummy_ops=dummy_ops, name="fig6b")
    r = run_sweep(spec, progress)
    return _relabel(r, "fig6b", ("fq", "withProtection", "noecc"), (0, 1))


def fig6c_study(p_grid: Sequence[float] = FIG6C_GRID, seed: int = 0, shots: int = DEFAULT_SHOTS,
                dummy_ops: int = FIG6C_DUMMY_OPS, frequency: int = FIG6C_FREQUENCY, qubits: int = 2,
                progress=None) -> SweepResult:
    """Depolarizing noise on the stabilizer backend and amplitude damping on
    sparse trajectories; the protected circuit shares one ancilla per
    logical qubit to stay small."""
    ecc = EccConfig("steane7", frequency, max_ancillas=1)
    common = dict(qubits=qubits, ecc=ecc, shots=shots, dummy_ops=dummy_ops)
    dep = run_sweep(ExperimentSpec("p", tuple(p_grid), noise=depolarizing(p_grid[0], seed),
                                   backend="stabilizer", name="fig6c-depolarizing", **common), progress)
    amp = run_sweep(ExperimentSpec("p", tuple(p_grid), noise=amplitude_damping(p_grid[0], seed),
                                   backend="trajectory", sparse=True, name="fig6c-damping", **common), progress)
    rows = [SweepRow(d.value, d.series + a.series, shots, d.seed, d.wall_time + a.wall_time)
            for d, a in zip(dep.rows, amp.rows)]
    return SweepResult("fig6c", ("error", "SteaneQ", "Q", "SteaneD", "D"), rows)


STUDIES = {"fig3": fig3_study, "fig5": fig5_study, "fig6a": fig6a_study, "fig6b": fig6b_study,
           "fig6c": fig6c_study}


# ---------------------------------------------------------------------------
# CSV


def _fmt(v: float | None) -> str:
    if v is None:
        return ""
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def csv_text(r: SweepResult) -> str:
    if not r.rows:
        raise ValueError("cannot emit an empty sweep result")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(r.columns)
    for row in r.rows:
        w.writerow([_fmt(row.value)] + [_fmt(v) for v in row.series])
    return buf.getvalue()


def emit_csv(r: SweepResult, path: str | Path) -> None:
    text = csv_text(r)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def parse_csv(text: str, name: str = "") -> SweepResult:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty CSV")
    columns = tuple(rows[0])
    out = SweepResult(name, columns)
    for rec in rows[1:]:
        vals = [float(x) if x != "" else None for x in rec]
        out.rows.append(SweepRow(vals[0], tuple(vals[1:])))
    return out


def read_csv(path: str | Path) -> SweepResult:
    with open(path, encoding="utf-8", newline="") as f:
        return parse_csv(f.read(), Path(path).stem)

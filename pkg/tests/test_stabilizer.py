import time

import numpy as np
import pytest

from gen import random_circuit, tvd_bound
from qecflow import circuit as C
from qecflow.circuit import Circuit, GateKind, gate, ghz_benchmark
from qecflow.dense import run_density, run_trajectories
from qecflow.noise import amplitude_damping, bit_flip, depolarizing, phase_flip
from qecflow.stabilizer import StabilizerUnsupportedError, Tableau, apply_clifford, measure, run_stabilizer


def _run(ops, n=1, nc=1, nm=None, shots=4000, seed=0):
    return run_stabilizer(Circuit(n, nc, tuple(ops)), nm, shots, seed=seed)


def test_h_then_measure_is_fair_coin():
    d = _run([gate(GateKind.H, 0), C.measure(0, 0)])
    assert 0.46 < d["0"] < 0.54
    exact = run_density(Circuit(1, 1, (gate(GateKind.H, 0), C.measure(0, 0))))
    assert d.tvd(exact) < 0.03


def test_x_then_measure():
    assert _run([gate(GateKind.X, 0), C.measure(0, 0)]).entries == {"1": 1.0}


def test_t_gate_rejected():
    with pytest.raises(StabilizerUnsupportedError, match="unsupported by stabilizer backend"):
        _run([gate(GateKind.T, 0), C.measure(0, 0)])
    with pytest.raises(StabilizerUnsupportedError, match="unsupported by stabilizer backend"):
        apply_clifford(Tableau(1), gate(GateKind.T, 0))


def test_damping_rejected():
    with pytest.raises(StabilizerUnsupportedError, match="amplitude damping requires a dense backend"):
        run_stabilizer(ghz_benchmark(2), amplitude_damping(0.1))


def test_deterministic_measurement_consumes_no_randomness():
    rng = np.random.default_rng(3)
    state = rng.bit_generator.state
    bit, _ = measure(Tableau(1), 0, rng)
    assert bit == 0
    assert rng.bit_generator.state == state


def test_ghz3_correlated_measurements():
    t = Tableau(3, shots=64)
    for op in ghz_benchmark(3).ops[:3]:
        apply_clifford(t, op)
    rng = np.random.default_rng(1)
    m0, t = measure(t, 0, rng)
    state = rng.bit_generator.state
    m1, t = measure(t, 1, rng)
    m2, t = measure(t, 2, rng)
    assert rng.bit_generator.state == state
    assert np.array_equal(m0, m1) and np.array_equal(m0, m2)
    assert 0 < m0.sum() < 64


def test_repeated_measurement_is_idempotent():
    t = Tableau(1, shots=32)
    apply_clifford(t, gate(GateKind.H, 0))
    rng = np.random.default_rng(2)
    first, t = measure(t, 0, rng)
    second, t = measure(t, 0, rng)
    assert np.array_equal(first, second)


def test_ghz100_noiseless():
    d = run_stabilizer(ghz_benchmark(100), None, 2000, seed=5)
    assert d.support() <= {"0" * 100, "1" * 100}
    assert len(d.support()) == 2


def test_ghz5_matches_trajectories():
    nm = depolarizing(1e-5, seed=2)
    c = ghz_benchmark(5)
    assert run_stabilizer(c, nm, 2000).tvd(run_trajectories(c, nm, 2000, seed=99)) < 0.03


def test_y_noise_flips_both_bases():
    # Y error on |+> flips it to |->; on |0> flips it to |1>
    y_after_h = [gate(GateKind.H, 0), gate(GateKind.Y, 0), gate(GateKind.H, 0), C.measure(0, 0)]
    assert _run(y_after_h).entries == {"1": 1.0}
    # certain phase flips after H and I cancel; one after H alone maps to X
    quiet = phase_flip(1.0, noisy_measurement=False)
    even = Circuit(1, 1, (gate(GateKind.H, 0), gate(GateKind.I, 0), gate(GateKind.H, 0), C.measure(0, 0)))
    odd = Circuit(1, 1, (gate(GateKind.H, 0), gate(GateKind.H, 0), C.measure(0, 0)))
    assert run_stabilizer(even, quiet, 100).entries == run_density(even, quiet).entries == {"0": 1.0}
    assert run_stabilizer(odd, quiet, 100).entries == run_density(odd, quiet).entries == {"1": 1.0}


def test_sdg_s_inverse_and_phase_signs():
    # S S = Z, so H S S H |0> = |1>
    ops = [gate(GateKind.H, 0), gate(GateKind.S, 0), gate(GateKind.S, 0), gate(GateKind.H, 0), C.measure(0, 0)]
    assert _run(ops).entries == {"1": 1.0}
    ops = [gate(GateKind.H, 0), gate(GateKind.S, 0), gate(GateKind.SDG, 0), gate(GateKind.H, 0), C.measure(0, 0)]
    assert _run(ops).entries == {"0": 1.0}


@pytest.mark.parametrize("trial", range(30))
def test_random_clifford_matches_exact(trial):
    rng = np.random.default_rng(1000 + trial)
    n = int(rng.integers(1, 7))
    c = random_circuit(rng, n, 25, conditions=True, mid_measure=True, resets=True)
    nm = [None, depolarizing(0.05), bit_flip(0.05), phase_flip(0.05)][trial % 4]
    exact = run_density(c, nm, max_qubits=8)
    got = run_stabilizer(c, nm, 20000, seed=trial, check_every_step=True)
    assert got.tvd(exact) < tvd_bound(exact, 20000, 0.01)


def test_seed_determinism():
    c = ghz_benchmark(6)
    nm = depolarizing(0.05, seed=4)
    assert run_stabilizer(c, nm, 1000) == run_stabilizer(c, nm, 1000)


def test_invariants_after_every_step():
    rng = np.random.default_rng(8)
    c = random_circuit(rng, 8, 60, mid_measure=True, resets=True)
    run_stabilizer(c, depolarizing(0.1), 500, check_every_step=True)


def test_tableau_rows_for_bell_state():
    t = Tableau(2)
    apply_clifford(t, gate(GateKind.H, 0))
    apply_clifford(t, gate(GateKind.CX, 0, 1))
    assert sorted(t.stabilizers()) == sorted(["+XX", "+ZZ"])
    t.check_invariants()


def test_polynomial_scaling():
    nm = depolarizing(1e-5)

    def timed(n):
        t0 = time.perf_counter()
        run_stabilizer(ghz_benchmark(n), nm, 2000)
        return time.perf_counter() - t0

    timed(50)  # warm-up
    t100 = min(timed(100) for _ in range(3))
    t200 = min(timed(200) for _ in range(3))
    assert t200 < 5
    assert t200 / t100 < 10

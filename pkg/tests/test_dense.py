import numpy as np
import pytest

from gen import random_circuit, tvd_bound
from qecflow.circuit import Circuit, Condition, GateKind, gate, ghz_benchmark, measure, reset
from qecflow.dense import (QubitCapError, final_density_matrix, final_state_vector, run_density, run_trajectories,
                           state_fidelity)
from qecflow.distribution import OutcomeDistribution
from qecflow.noise import amplitude_damping, kraus_of, bit_flip, depolarizing, phase_flip
from qecflow.states import DensityMatrix, SparseState, StateVector

X_MEASURE = Circuit(1, 1, (gate(GateKind.X, 0), measure(0, 0)))


def test_ghz3_exact():
    assert run_density(ghz_benchmark(3)).entries == pytest.approx({"000": 0.5, "111": 0.5})


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5])
def test_x_measure_bitflip_two_uses(p):
    # noise follows X and precedes readout: outcome 1 needs an even number of flips
    d = run_density(X_MEASURE, bit_flip(p))
    assert d["1"] == pytest.approx((1 - p) ** 2 + p**2, abs=1e-12)


@pytest.mark.parametrize("p", [0.1, 0.3])
def test_x_measure_bitflip_without_measurement_noise(p):
    d = run_density(X_MEASURE, bit_flip(p, noisy_measurement=False))
    assert d.entries == pytest.approx({"1": 1 - p, "0": p})


def test_measure_only():
    assert run_density(Circuit(1, 1, (measure(0, 0),))).entries == {"0": 1.0}


def test_exact_distribution_is_marked_exact():
    assert run_density(ghz_benchmark(2)).is_exact


def test_ghz3_trajectories_noiseless():
    d = run_trajectories(ghz_benchmark(3), None, 2000, seed=1)
    assert d.support() == {"000", "111"}
    assert 0.44 <= d["000"] <= 0.56
    assert d.shots == 2000


def test_x_measure_trajectories_match_exact():
    nm = bit_flip(0.5, seed=4)
    assert run_trajectories(X_MEASURE, nm, 2000).tvd(run_density(X_MEASURE, nm)) < 0.02


def test_trajectories_deterministic():
    nm = depolarizing(0.1, seed=8)
    c = ghz_benchmark(4)
    assert run_trajectories(c, nm, 2000) == run_trajectories(c, nm, 2000)
    assert run_trajectories(c, nm, 2000, seed=1) != run_trajectories(c, nm, 2000, seed=2)


MODELS = [depolarizing(0.08), bit_flip(0.1), phase_flip(0.1), amplitude_damping(0.15)]


@pytest.mark.parametrize("nm", MODELS, ids=lambda m: m.channel.kind.value)
@pytest.mark.parametrize("trial", range(4))
def test_trajectories_converge_to_exact(nm, trial):
    rng = np.random.default_rng(100 + trial)
    kinds = (GateKind.H, GateKind.S, GateKind.T, GateKind.X, GateKind.Y, GateKind.CX, GateKind.CZ, GateKind.I)
    c = random_circuit(rng, int(rng.integers(1, 4)), 10, kinds, conditions=True, mid_measure=True, resets=True)
    exact = run_density(c, nm)
    assert run_trajectories(c, nm, 2000, seed=trial).tvd(exact) < tvd_bound(exact, 2000, 0.02)
    assert run_trajectories(c, nm, 50000, seed=trial).tvd(exact) < tvd_bound(exact, 50000, 0.005)


@pytest.mark.parametrize("nm", MODELS, ids=lambda m: m.channel.kind.value)
def test_sparse_trajectories_match_dense(nm):
    rng = np.random.default_rng(7)
    c = random_circuit(rng, 3, 12, conditions=True, mid_measure=True)
    exact = run_density(c, nm)
    assert run_trajectories(c, nm, 50000, sparse=True).tvd(exact) < 0.01


def test_feed_forward_teleport_like():
    # measure |+>, conditionally flip a second qubit: outcomes 00 and 11 only
    c = Circuit(2, 2, (gate(GateKind.H, 0), measure(0, 0),
                       gate(GateKind.X, 1, condition=Condition(0, 1, 1)), measure(1, 1)))
    assert run_density(c).entries == pytest.approx({"00": 0.5, "11": 0.5})
    assert run_trajectories(c, None, 4000, seed=3).support() == {"00", "11"}


def test_reset_returns_to_zero():
    c = Circuit(1, 2, (gate(GateKind.H, 0), measure(0, 0), reset(0), measure(0, 1)))
    assert run_density(c).entries == pytest.approx({"00": 0.5, "10": 0.5})


def test_conditioned_gate_noise_only_when_fired():
    # the X never fires, so the only noise is on the readout of a |0> qubit
    c = Circuit(1, 2, (measure(0, 1), gate(GateKind.X, 0, condition=Condition(1, 1, 1)), measure(0, 0)))
    d = run_density(c, bit_flip(0.1, noisy_measurement=False))
    assert d.entries == {"00": 1.0}


def test_exempt_tags_are_noiseless():
    c = Circuit(1, 1, (gate(GateKind.X, 0, tag="quiet"), measure(0, 0)))
    d = run_density(c, bit_flip(0.3, noisy_measurement=False, exempt_tags={"quiet"}))
    assert d.entries == {"1": 1.0}


def test_identity_aggregation_matches_unrolled():
    ops = (gate(GateKind.H, 0),) + tuple(gate(GateKind.I, 0) for _ in range(7)) + (gate(GateKind.H, 0), measure(0, 0))
    c = Circuit(1, 1, ops)
    nm = depolarizing(0.05)
    d = run_density(c, nm)
    rho = DensityMatrix(1)
    rho.apply_gate(GateKind.H, (0,))
    for _ in range(8):
        rho.apply_kraus(kraus_of(nm.channel), 0)
    rho.apply_gate(GateKind.H, (0,))
    rho.apply_kraus(kraus_of(nm.channel), 0)
    rho.apply_kraus(kraus_of(nm.channel), 0)
    assert d["0"] == pytest.approx(rho.diagonal()[0].real, abs=1e-12)
    # each use shrinks the relevant Bloch component by 1-p
    assert d["0"] == pytest.approx(0.5 * (1 + 0.95**10), abs=1e-12)


def test_density_cap():
    with pytest.raises(QubitCapError, match="capped at 10"):
        run_density(ghz_benchmark(11), depolarizing(0.01))
    run_density(ghz_benchmark(11), depolarizing(0.01), max_qubits=11)


def test_trajectory_cap():
    with pytest.raises(QubitCapError):
        run_trajectories(ghz_benchmark(25), depolarizing(0.01), 10)
    d = run_trajectories(ghz_benchmark(25), depolarizing(0.0), 10, sparse=True)
    assert d.support() <= {"0" * 25, "1" * 25}


def test_noiseless_exact_handles_wide_sparse_circuits():
    assert run_density(ghz_benchmark(40)).entries == pytest.approx({"0" * 40: 0.5, "1" * 40: 0.5})


# -- states ------------------------------------------------------------------


def test_cx_amplitude_map():
    # qubit 0 is bit 0 of the basis index; |q1 q0> = |0 1> -> |1 1>
    psi = StateVector(2)
    psi.amplitudes[:] = [0.1, 0.7, 0.5, np.sqrt(1 - 0.75)]
    before = psi.amplitudes.copy()
    psi.apply_gate(GateKind.CX, (0, 1))
    assert psi.amplitudes[3] == before[1] and psi.amplitudes[1] == before[3]
    assert psi.amplitudes[0] == before[0] and psi.amplitudes[2] == before[2]


@pytest.mark.parametrize("kind, want", [
    (GateKind.H, [1 / np.sqrt(2), 1 / np.sqrt(2)]),
    (GateKind.X, [0, 1]),
    (GateKind.Z, [1, 0]),
])
def test_single_qubit_gates_on_zero(kind, want):
    psi = StateVector(1)
    psi.apply_gate(kind, (0,))
    assert np.allclose(psi.amplitudes, want)


def test_z_flips_phase_of_one():
    psi = StateVector(1)
    psi.apply_gate(GateKind.H, (0,))
    psi.apply_gate(GateKind.Z, (0,))
    assert np.allclose(psi.amplitudes, [1 / np.sqrt(2), -1 / np.sqrt(2)])


@pytest.mark.parametrize("seed", range(5))
def test_norm_preserved_and_sparse_agrees(seed):
    rng = np.random.default_rng(seed)
    kinds = (GateKind.H, GateKind.S, GateKind.SDG, GateKind.T, GateKind.X, GateKind.Y, GateKind.Z, GateKind.CX,
             GateKind.CZ)
    c = random_circuit(rng, 4, 40, kinds, measure_all=False)
    psi = StateVector(4)
    sp = SparseState(4)
    for op in c.ops:
        psi.apply_gate(op.kind, op.qubits)
        sp.apply_gate(op.kind, op.qubits)
        assert abs(psi.norm_sq() - 1) < 1e-10
    assert np.allclose(sp.to_dense(), psi.amplitudes)
    rho = final_density_matrix(c)
    m = rho.matrix
    assert abs(np.trace(m) - 1) < 1e-10
    assert np.allclose(m, m.conj().T, atol=1e-10)
    assert np.allclose(m, np.outer(psi.amplitudes, psi.amplitudes.conj()))


def test_noisy_density_matrix_invariants():
    rng = np.random.default_rng(5)
    c = random_circuit(rng, 3, 25, measure_all=False)
    for nm in MODELS:
        m = final_density_matrix(c, nm).matrix
        assert abs(np.trace(m) - 1) < 1e-10
        assert np.allclose(m, m.conj().T, atol=1e-10)
        assert np.linalg.eigvalsh(m).min() > -1e-8


def test_measurement_renormalizes():
    psi = StateVector(2)
    psi.apply_gate(GateKind.H, (0,))
    psi.apply_gate(GateKind.CX, (0, 1))
    psi.project(0, 1)
    psi.normalize()
    assert abs(psi.norm_sq() - 1) < 1e-10
    assert np.allclose(psi.amplitudes, [0, 0, 0, 1])


# -- fidelity ----------------------------------------------------------------


def test_state_fidelity_cases():
    zero, one = np.array([1, 0], complex), np.array([0, 1], complex)
    assert state_fidelity(zero, zero) == 1
    assert state_fidelity(zero, one) == 0
    p = 0.3
    rho = np.diag([1 - p, p]).astype(complex)
    assert state_fidelity(zero, rho) == pytest.approx(1 - p)
    assert state_fidelity(rho, zero) == pytest.approx(1 - p)
    sigma = np.array([[0.5, 0.2], [0.2, 0.5]], complex)
    assert state_fidelity(rho, sigma) == pytest.approx(state_fidelity(sigma, rho))
    assert state_fidelity(rho, rho) == pytest.approx(1)
    with pytest.raises(ValueError, match="dimension"):
        state_fidelity(zero, np.eye(4))


def test_state_fidelity_accepts_state_objects():
    c = Circuit(1, 0, (gate(GateKind.H, 0),))
    psi = final_state_vector(c)
    rho = final_density_matrix(c, bit_flip(0.2))
    assert state_fidelity(psi, rho) == pytest.approx(1.0)  # X leaves |+> unchanged
    rho = final_density_matrix(c, phase_flip(0.2))
    assert state_fidelity(psi, rho) == pytest.approx(0.8)


# -- distributions -----------------------------------------------------------


def test_distribution_validation_and_marginal():
    with pytest.raises(ValueError):
        OutcomeDistribution({"0": 0.7})
    d = OutcomeDistribution({"00": 0.25, "01": 0.25, "11": 0.5})
    assert d.marginal([1]).entries == {"0": 0.25, "1": 0.75}
    assert d["10"] == 0
    assert d.tvd(OutcomeDistribution({"00": 1.0})) == pytest.approx(0.75)
    assert OutcomeDistribution.from_counts({"0": 3, "1": 1}).shots == 4

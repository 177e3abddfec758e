import numpy as np
import pytest

from qecflow.circuit import Circuit, GateKind, gate
from qecflow.codes import CODE_NAMES, UnknownCodeError, all_schemes, controlled_pauli, get_scheme
from qecflow.compiler import correct_single_error_oracle
from qecflow.dense import final_state_vector
from qecflow.noise import PAULI_MATRICES
from qecflow.paulis import PauliString
from qecflow.states import StateVector

SCHEMES = all_schemes()


def _expectation(psi: np.ndarray, p: PauliString) -> float:
    """<psi|P|psi> with qubit k of the string on basis bit k."""
    n = len(p)
    state = psi.reshape([2] * n)  # axis 0 is the highest qubit
    out = state
    for k, lab in enumerate(p.ops):
        if lab == "I":
            continue
        axis = n - 1 - k
        out = np.moveaxis(np.tensordot(PAULI_MATRICES[lab], out, axes=([1], [axis])), 0, axis)
    return float(p.sign * np.vdot(state.ravel(), out.ravel()).real)


def _encoded(scheme, prep=()):
    ops = [gate(k, scheme.readout_qubit) for k in prep] + list(scheme.encoder)
    return final_state_vector(Circuit(scheme.n_physical, 0, tuple(ops))).amplitudes


def test_catalog_names():
    assert tuple(s.name for s in SCHEMES) == CODE_NAMES
    with pytest.raises(UnknownCodeError, match="valid codes: bitflip3"):
        get_scheme("nosuch")


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_encoded_zero_is_stabilized(scheme):
    psi = _encoded(scheme)
    for g in scheme.stabilizers:
        assert _expectation(psi, g) == pytest.approx(1.0)
    assert _expectation(psi, scheme.logical_z) == pytest.approx(1.0)


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_encoded_plus_is_logical_x_eigenstate(scheme):
    psi = _encoded(scheme, (GateKind.H,))
    for g in scheme.stabilizers:
        assert _expectation(psi, g) == pytest.approx(1.0)
    assert _expectation(psi, scheme.logical_x) == pytest.approx(1.0)


def test_steane_zero_stabilized_by_six_generators():
    steane = get_scheme("steane7")
    assert len(steane.stabilizers) == 6
    psi = _encoded(steane)
    assert all(_expectation(psi, g) == pytest.approx(1.0) for g in steane.stabilizers)


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_decoder_inverts_encoder(scheme):
    n = scheme.n_physical
    prep = (gate(GateKind.H, scheme.readout_qubit), gate(GateKind.T, scheme.readout_qubit),
            gate(GateKind.S, scheme.readout_qubit))
    c = Circuit(n, 0, prep + scheme.encoder + scheme.decoder)
    want = StateVector(n)
    for op in prep:
        want.apply_gate(op.kind, op.qubits)
    assert np.allclose(final_state_vector(c).amplitudes, want.amplitudes)


def test_bitflip3_encoder_is_two_cnots():
    enc = get_scheme("bitflip3").encoder
    assert enc == (gate(GateKind.CX, 0, 1), gate(GateKind.CX, 0, 2))
    assert get_scheme("bitflip3").readout_qubit == 0


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_decoder_table(scheme):
    table = scheme.decoder_table
    assert table.lookup(0) == ()
    assert 0 not in table.entries
    labels = "X" if scheme.name == "bitflip3" else "XYZ"
    for q in range(scheme.n_physical):
        for lab in labels:
            s = scheme.syndrome_of(PauliString.single(scheme.n_physical, q, lab))
            assert s != 0
            fix = table.lookup(s)
            residual = PauliString.single(scheme.n_physical, q, lab)
            for fq, flab in fix:
                residual = residual * PauliString.single(scheme.n_physical, fq, flab)
            assert scheme.syndrome_of(residual) == 0


def test_decoder_table_counts_misses():
    table = get_scheme("bitflip3").decoder_table
    before = table.misses
    assert table.lookup(0b100) == ()
    assert table.misses == before + 1


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_syndrome_block_shape(scheme):
    n, a = scheme.n_physical, scheme.n_ancilla
    ops = scheme.syndrome_block(range(n), range(n, n + a), 0)
    assert sum(op.kind is GateKind.MEASURE for op in ops) == scheme.n_stabilizers
    assert sum(op.kind is GateKind.RESET for op in ops) == scheme.n_stabilizers
    conds = [op for op in ops if op.condition is not None]
    assert len(conds) == len(scheme.decoder_table.entries)
    assert all(op.condition.value != 0 for op in conds)


def test_bitflip3_block_uses_two_ancillas_and_four_cz():
    ops = get_scheme("bitflip3").syndrome_block((0, 1, 2), (3, 4), 1)
    assert sum(op.kind is GateKind.CZ for op in ops) == 4
    assert {q for op in ops if op.kind is GateKind.CZ for q in op.qubits if q >= 3} == {3, 4}


def test_shared_ancilla_block():
    steane = get_scheme("steane7")
    ops = steane.syndrome_block(range(7), (7,), 0)
    assert {op.qubits[0] for op in ops if op.kind is GateKind.MEASURE} == {7}


@pytest.mark.parametrize("q", range(3))
def test_oracle_bitflip3(q):
    assert correct_single_error_oracle("bitflip3", (q, "X"))


def test_oracle_bitflip3_phase_error_fails():
    assert not correct_single_error_oracle("bitflip3", (0, "Z"))


@pytest.mark.parametrize("q", range(5))
@pytest.mark.parametrize("lab", "XYZ")
def test_oracle_laflamme5(q, lab):
    assert correct_single_error_oracle("laflamme5", (q, lab))


def test_oracle_detects_uncorrectable_double_error():
    steane = get_scheme("steane7")
    assert not correct_single_error_oracle(steane, PauliString.parse("XXIIIII"))


def test_controlled_pauli_forms():
    assert controlled_pauli(0, 1, "X") == [gate(GateKind.CX, 0, 1)]
    assert [op.kind for op in controlled_pauli(0, 1, "Y")] == [GateKind.SDG, GateKind.CX, GateKind.S]
    with pytest.raises(ValueError):
        controlled_pauli(0, 1, "I")


def test_describe_lists_gate_set():
    line = get_scheme("steane7").describe()
    assert "n_physical=7" in line and "n_ancilla=6" in line and "distance=3" in line and "gates=" in line


def test_pauli_algebra():
    x, z = PauliString.parse("X"), PauliString.parse("Z")
    assert not x.commutes(z)
    assert PauliString.parse("XX").commutes(PauliString.parse("ZZ"))
    y = PauliString.parse("XZ") * PauliString.parse("ZX")
    assert y.ops == "YY" and y.sign == 1
    with pytest.raises(ValueError):
        _ = x * z

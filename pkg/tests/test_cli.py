import json
import subprocess
import sys

import pytest

from qecflow.circuit import Circuit, GateKind, gate, ghz_benchmark, measure, parse_circuit, serialize_circuit
from qecflow.cli import EXIT_INPUT, EXIT_IO, EXIT_OK, EXIT_UNSUPPORTED, SEED_ENV, main
from qecflow.codes import CODE_NAMES


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def ghz3_file(tmp_path):
    path = tmp_path / "ghz3.qc"
    path.write_text(serialize_circuit(ghz_benchmark(3)))
    return str(path)


def test_list_codes(capsys):
    code, out, _ = run(capsys, "list-codes")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert [ln.split()[0] for ln in lines] == list(CODE_NAMES)


def test_simulate_prints_seed_and_distribution(capsys, ghz3_file):
    code, out, err = run(capsys, "simulate", "--in", ghz3_file, "--seed", "7")
    assert code == EXIT_OK
    assert "seed=7" in err
    keys = {ln.split()[0] for ln in out.splitlines()}
    assert keys == {"000", "111"}


def test_simulate_is_deterministic(capsys, ghz3_file):
    args = ("simulate", "--in", ghz3_file, "--noise", "depolarizing", "-p", "0.05", "--seed", "11")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    _, other, _ = run(capsys, *args[:-1], "12")
    assert other != first


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "42")
    _, _, err = run(capsys, "simulate", "--ghz", "2")
    assert "seed=42" in err
    _, _, err = run(capsys, "simulate", "--ghz", "2", "--seed", "3")
    assert "seed=3" in err
    monkeypatch.setenv(SEED_ENV, "abc")
    code, _, err = run(capsys, "simulate", "--ghz", "2")
    assert code == EXIT_INPUT and SEED_ENV in err


def test_missing_file_is_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "simulate", "--in", str(tmp_path / "nope.qc"))
    assert code == EXIT_IO and "cannot read" in err


def test_parse_error_is_input_error(capsys, tmp_path):
    bad = tmp_path / "bad.qc"
    bad.write_text("qubits 1;\nclbits 1;\nfrobnicate q[0];\n")
    code, _, _ = run(capsys, "simulate", "--in", str(bad))
    assert code == EXIT_INPUT


def test_damping_on_stabilizer_is_input_error(capsys):
    code, _, err = run(capsys, "simulate", "--ghz", "2", "--noise", "damping", "-p", "0.1",
                       "--backend", "stabilizer")
    assert code == EXIT_INPUT
    assert "damping noise cannot be simulated with the stabilizer backend" in err


def test_unknown_code_is_input_error(capsys, ghz3_file):
    code, _, err = run(capsys, "apply-ecc", "--code", "nosuch", "--in", ghz3_file)
    assert code == EXIT_INPUT and "bitflip3" in err


def test_unsupported_gate_exit_code(capsys, tmp_path):
    path = tmp_path / "t.qc"
    path.write_text(serialize_circuit(Circuit(1, 1, (gate(GateKind.T, 0), measure(0, 0)))))
    code, _, err = run(capsys, "apply-ecc", "--code", "steane7", "--in", str(path))
    assert code == EXIT_UNSUPPORTED
    assert "gate 't' is not supported by code 'steane7'" in err


def test_apply_ecc_writes_parsable_circuit(capsys, tmp_path):
    src = tmp_path / "x.qc"
    src.write_text(serialize_circuit(Circuit(1, 1, (gate(GateKind.X, 0), measure(0, 0)))))
    dst = tmp_path / "x_ecc.qc"
    code, _, _ = run(capsys, "apply-ecc", "--code", "bitflip3", "--in", str(src), "--out", str(dst))
    assert code == EXIT_OK
    out = parse_circuit(dst.read_text())
    assert out.num_qubits == 5
    code, text, _ = run(capsys, "simulate", "--in", str(dst))
    assert text.splitlines()[0].split()[0].startswith("1")


def test_simulate_with_code_reports_original_clbits(capsys):
    code, out, _ = run(capsys, "simulate", "--ghz", "2", "--code", "steane7", "--fidelity", "--seed", "1")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert {ln.split()[0] for ln in lines[:-1]} == {"00", "11"}
    assert lines[-1].startswith("fidelity ")
    assert float(lines[-1].split()[1]) > 0.99


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"backend": "trajectory", "shots": 500,
                               "noise": {"kind": "damping", "p": 0.2, "seed": 9}}))
    code, out, err = run(capsys, "simulate", "--ghz", "2", "--config", str(cfg))
    assert code == EXIT_OK and "seed=9" in err
    assert set(ln.split()[0] for ln in out.splitlines()) <= {"00", "01", "10", "11"}
    cfg.write_text("[1, 2]")
    assert run(capsys, "simulate", "--ghz", "2", "--config", str(cfg))[0] == EXIT_INPUT


def test_custom_sweep_one_row(capsys):
    code, out, _ = run(capsys, "sweep", "custom", "--param", "p", "--values", "0.001", "--qubits", "2",
                       "--dummy-ops", "10", "--shots", "200", "--seed", "1")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "p,withProtection,noProtection"
    assert len(lines) == 2


def test_custom_sweep_needs_param(capsys):
    code, _, err = run(capsys, "sweep", "custom", "--values", "0.001")
    assert code == EXIT_INPUT and "--param" in err


def test_fig3_sweep_csv(capsys, tmp_path):
    out = tmp_path / "fig3.csv"
    code, _, _ = run(capsys, "sweep", "fig3", "--values", "0,0.1", "--shots", "500", "--out", str(out))
    assert code == EXIT_OK
    text = out.read_text()
    assert text.splitlines()[0] == "ErrorProb,NoECC,BitflipIdeal,BitflipRealistic"
    assert len(text.splitlines()) == 3


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as e:
        main(["simulate", "--backend"])
    assert e.value.code == 2


def test_module_entry_point(ghz3_file):
    proc = subprocess.run([sys.executable, "-m", "qecflow", "simulate", "--in", ghz3_file, "--seed", "7"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "seed=7" in proc.stderr
    assert proc.stdout.count("\n") == 2

"""Command-line interface.

Exit codes: 0 success, 1 I/O failure, 2 bad input (parse error, usage,
unknown code, incompatible backend/noise), 3 circuit not supported by the
chosen code. Payloads go to stdout; the resolved seed, progress and errors go
to stderr. ``QECFLOW_SEED`` overrides the default seed when ``--seed`` is not
given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import experiments as ex
from .backends import BACKENDS, BackendError, check_compatible, resolve_backend, simulate
from .circuit import Circuit, CircuitParseError, ghz_benchmark, parse_circuit, serialize_circuit
from .codes import CODE_NAMES, UnknownCodeError, all_schemes, get_scheme
from .compiler import EccCompileError, EccConfig, UnsupportedGateError, apply_ecc, compile_with_layout
from .dense import QubitCapError, run_density
from .metrics import hellinger_coefficient
from .noise import ChannelKind, NoiseChannel, NoiseModel

EXIT_OK, EXIT_IO, EXIT_INPUT, EXIT_UNSUPPORTED = 0, 1, 2, 3
SEED_ENV = "QECFLOW_SEED"
NOISE_KINDS = ("none",) + tuple(k.value for k in ChannelKind)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _err(msg: str) -> None:
    print(f"qecflow: {msg}", file=sys.stderr)


def _resolve_seed(arg: int | None, fallback: int = 0) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"{SEED_ENV} must be an integer, got {env!r}", EXIT_INPUT) from None
    return fallback


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}", EXIT_IO) from None


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise CliError(f"cannot write {path}: {e.strerror}", EXIT_IO) from None


def _load_circuit(args) -> Circuit:
    if getattr(args, "ghz", None) is not None:
        return ghz_benchmark(args.ghz)
    if args.input is None:
        raise CliError("an input circuit is required (--in FILE or --ghz N)", EXIT_INPUT)
    text = _read_text(args.input)
    try:
        return parse_circuit(text)
    except CircuitParseError as e:
        raise CliError(f"{args.input}: {e}", EXIT_INPUT) from None


def _scheme_name(name: str) -> str:
    try:
        return get_scheme(name).name
    except UnknownCodeError as e:
        raise CliError(str(e), EXIT_INPUT) from None


def _noise_from_args(kind: str, p: float, seed: int) -> NoiseModel | None:
    if kind == "none":
        return None
    try:
        return NoiseModel(NoiseChannel(ChannelKind(kind), p), seed=seed)
    except ValueError as e:
        raise CliError(str(e), EXIT_INPUT) from None


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(_read_text(path))
    except json.JSONDecodeError as e:
        raise CliError(f"{path}: invalid JSON ({e.msg})", EXIT_INPUT) from None
    if not isinstance(cfg, dict):
        raise CliError(f"{path}: top level must be an object", EXIT_INPUT)
    return cfg


# ---------------------------------------------------------------------------
# subcommands


def cmd_apply_ecc(args) -> int:
    code = _scheme_name(args.code)
    c = _load_circuit(args)
    try:
        cfg = EccConfig(code, args.frequency, correct_before_measure=not args.no_final_correction,
                        max_ancillas=args.max_ancillas)
        out = apply_ecc(c, cfg)
    except (UnsupportedGateError, EccCompileError) as e:
        raise CliError(str(e), EXIT_UNSUPPORTED) from None
    except ValueError as e:
        raise CliError(str(e), EXIT_INPUT) from None
    _write_text(args.out, serialize_circuit(out))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    ncfg = cfg.get("noise", {})
    kind = args.noise or ncfg.get("kind", "none")
    p = args.p if args.p is not None else float(ncfg.get("p", 1e-5))
    shots = args.shots if args.shots is not None else int(cfg.get("shots", ex.DEFAULT_SHOTS))
    backend_name = args.backend or cfg.get("backend", "stabilizer")
    seed = _resolve_seed(args.seed, int(ncfg.get("seed", cfg.get("seed", 0))))
    if kind not in NOISE_KINDS:
        raise CliError(f"unknown noise kind {kind!r}; choose from {', '.join(NOISE_KINDS)}", EXIT_INPUT)
    print(f"seed={seed}", file=sys.stderr)
    nm = _noise_from_args(kind, p, seed)
    try:
        backend = resolve_backend(backend_name)
        check_compatible(backend, nm)
    except BackendError as e:
        raise CliError(str(e), EXIT_INPUT) from None
    original = c = _load_circuit(args)
    clbits = args.clbits
    if args.code:
        try:
            c, layout = compile_with_layout(c, EccConfig(_scheme_name(args.code), args.frequency))
        except (UnsupportedGateError, EccCompileError) as e:
            raise CliError(str(e), EXIT_UNSUPPORTED) from None
        if clbits is None:
            clbits = list(layout.output_clbits)
    try:
        dist = simulate(c, nm, backend, shots, seed, sparse=args.sparse)
    except (BackendError, QubitCapError) as e:
        raise CliError(str(e), EXIT_INPUT) from None
    if clbits is not None:
        dist = dist.marginal(clbits)
    lines = dist.format_lines()
    if args.fidelity:
        ref = run_density(original)
        if clbits is not None:
            ref = ref.marginal([b for b in clbits if b < original.num_clbits])
        lines.append(f"fidelity {hellinger_coefficient(dist, ref)!r}")
    sys.stdout.write("".join(line + "\n" for line in lines))
    return EXIT_OK


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _floats(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise CliError(f"bad value list {text!r}", EXIT_INPUT) from None
    if not vals:
        raise CliError("value list is empty", EXIT_INPUT)
    return vals


def cmd_sweep(args) -> int:
    seed = _resolve_seed(args.seed)
    print(f"seed={seed}", file=sys.stderr)
    shots = args.shots if args.shots is not None else ex.DEFAULT_SHOTS
    name = args.study
    kw = dict(seed=seed, shots=shots, progress=_progress)
    if args.values:
        grid = _floats(args.values)
    else:
        grid = None
    try:
        if name == "fig3":
            r = ex.fig3_study(grid or ex.FIG3_GRID, **kw)
        elif name == "fig5":
            r = ex.fig5_study(tuple(int(v) for v in grid) if grid else ex.FIG5_GRID, **kw)
        elif name == "fig6a":
            r = ex.fig6a_study(tuple(int(v) for v in grid) if grid else ex.FIG6A_DEPTHS,
                               p=args.p if args.p is not None else ex.FIG6A_P, **kw)
        elif name == "fig6b":
            r = ex.fig6b_study(tuple(int(v) for v in grid) if grid else ex.FIG6B_FREQUENCIES,
                               p=args.p if args.p is not None else ex.FIG6B_P, **kw)
        elif name == "fig6c":
            r = ex.fig6c_study(grid or ex.FIG6C_GRID, **kw)
        else:
            r = _custom_sweep(args, grid, seed, shots)
    except (UnsupportedGateError, EccCompileError) as e:
        raise CliError(str(e), EXIT_UNSUPPORTED) from None
    except (BackendError, QubitCapError, UnknownCodeError) as e:
        raise CliError(str(e), EXIT_INPUT) from None
    _write_text(args.out, ex.csv_text(r))
    return EXIT_OK


def _custom_sweep(args, grid, seed: int, shots: int) -> ex.SweepResult:
    if not args.param or grid is None:
        raise CliError("custom sweeps need --param and --values", EXIT_INPUT)
    kind = args.noise or "depolarizing"
    if kind == "none":
        raise CliError("custom sweeps need a noise channel", EXIT_INPUT)
    p = args.p if args.p is not None else ex.DEFAULT_P
    ecc = None if args.code == "none" else EccConfig(_scheme_name(args.code), args.frequency,
                                                     max_ancillas=args.max_ancillas)
    try:
        spec = ex.ExperimentSpec(
            args.param, grid, qubits=args.qubits, ecc=ecc, noise=_noise_from_args(kind, p, seed),
            backend=args.backend or "stabilizer", shots=shots, dummy_ops=args.dummy_ops,
            sparse=args.sparse, name="custom")
    except BackendError:
        raise
    except ValueError as e:
        raise CliError(str(e), EXIT_INPUT) from None
    return ex.run_sweep(spec, _progress)


def cmd_list_codes(args) -> int:
    sys.stdout.write("".join(s.describe() + "\n" for s in all_schemes()))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qecflow", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("apply-ecc", help="compile a circuit with an error-correcting code")
    a.add_argument("--code", required=True, help=f"one of {', '.join(CODE_NAMES)}")
    a.add_argument("--in", dest="input", help="input circuit file ('-' for stdin)")
    a.add_argument("--out", help="output file (default stdout)")
    a.add_argument("--frequency", type=int, default=ex.DEFAULT_FREQUENCY,
                   help="logical-qubit uses between correction rounds")
    a.add_argument("--max-ancillas", type=int, default=None, help="ancillas per logical qubit")
    a.add_argument("--no-final-correction", action="store_true",
                   help="skip the correction round before each measurement")
    a.set_defaults(func=cmd_apply_ecc)

    s = sub.add_parser("simulate", help="simulate a circuit and print its outcome distribution")
    src = s.add_mutually_exclusive_group()
    src.add_argument("--in", dest="input", help="input circuit file ('-' for stdin)")
    src.add_argument("--ghz", type=int, help="use the GHZ-n benchmark")
    s.add_argument("--backend", help=f"one of {', '.join(BACKENDS)} (default stabilizer)")
    s.add_argument("--noise", help=f"one of {', '.join(NOISE_KINDS)} (default none)")
    s.add_argument("-p", type=float, default=None, help="error probability (default 1e-5)")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--shots", type=int, default=None)
    s.add_argument("--code", help="apply this code before simulating")
    s.add_argument("--frequency", type=int, default=ex.DEFAULT_FREQUENCY)
    s.add_argument("--clbits", type=lambda t: [int(x) for x in t.split(",")], default=None,
                   help="comma-separated clbits to report (default: all, or the original ones with --code)")
    s.add_argument("--sparse", action="store_true", help="sparse states for the trajectory backend")
    s.add_argument("--fidelity", action="store_true", help="also print the Hellinger coefficient vs the ideal run")
    s.add_argument("--config", help='JSON file, e.g. {"backend": "trajectory", "noise": {"kind": "damping", "p": 0.01, "seed": 3}}')
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="run a study and write its CSV")
    w.add_argument("study", choices=("fig3", "fig5", "fig6a", "fig6b", "fig6c", "custom"))
    w.add_argument("--out", help="output CSV (default stdout)")
    w.add_argument("--seed", type=int, default=None)
    w.add_argument("--shots", type=int, default=None)
    w.add_argument("--values", help="comma-separated grid overriding the study default")
    w.add_argument("-p", type=float, default=None, help="error probability")
    w.add_argument("--param", choices=ex.SWEEP_PARAMS, help="swept parameter (custom)")
    w.add_argument("--code", default="steane7", help="code for custom sweeps, or 'none'")
    w.add_argument("--frequency", type=int, default=ex.DEFAULT_FREQUENCY)
    w.add_argument("--max-ancillas", type=int, default=None)
    w.add_argument("--noise", help="noise channel for custom sweeps (default depolarizing)")
    w.add_argument("--backend", help="backend for custom sweeps (default stabilizer)")
    w.add_argument("--qubits", type=int, default=ex.DEFAULT_QUBITS)
    w.add_argument("--dummy-ops", type=int, default=ex.DEFAULT_DUMMY_OPS)
    w.add_argument("--sparse", action="store_true")
    w.set_defaults(func=cmd_sweep)

    c = sub.add_parser("list-codes", help="list the available codes")
    c.set_defaults(func=cmd_list_codes)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        _err(str(e))
        return e.code
    except BackendError as e:
        _err(str(e))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""The four-pass error-correction compiler.

``encode_pass`` widens the circuit and prepends encoders; the original ops
are carried along tagged ``pending`` (still using logical qubit indices).
``map_operations_pass`` swaps pending gates for their logical fragments,
``insert_correction_pass`` adds syndrome blocks, and ``decode_pass`` turns
each pending measurement into decoder + physical readout.

Tags on emitted ops: ``encode``, ``logical:<i>`` (``i`` is the source op
index), ``correct`` and ``decode``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import Circuit, GateKind, Operation, check, gate, measure
from .codes import EccScheme, get_scheme
from .dense import run_density
from .paulis import PauliString

PENDING = "pending"
ENCODE = "encode"
CORRECT = "correct"
DECODE = "decode"
LOGICAL_PREFIX = "logical:"


class UnsupportedGateError(ValueError):
    def __init__(self, kind: GateKind, code: str):
        super().__init__(f"gate '{kind.value}' is not supported by code '{code}'")
        self.kind = kind
        self.code = code


class EccCompileError(ValueError):
    pass


@dataclass(frozen=True)
class EccConfig:
    scheme: str
    correction_frequency: int = 500
    correct_before_measure: bool = True
    max_ancillas: int | None = None  # per logical qubit; None means one per stabilizer

    def __post_init__(self):
        if self.correction_frequency < 1:
            raise ValueError("correction_frequency must be at least 1")
        if self.max_ancillas is not None and self.max_ancillas < 1:
            raise ValueError("max_ancillas must be at least 1")

    @property
    def code(self) -> EccScheme:
        return get_scheme(self.scheme)

    @property
    def ancillas_per_block(self) -> int:
        n = self.code.n_ancilla
        return n if self.max_ancillas is None else min(n, self.max_ancillas)


@dataclass(frozen=True)
class LogicalBlock:
    data: tuple[int, ...]
    ancillas: tuple[int, ...]
    syndrome_clbits: tuple[int, ...]


@dataclass(frozen=True)
class LogicalLayout:
    blocks: tuple[LogicalBlock, ...]
    num_qubits: int
    num_clbits: int
    output_clbits: tuple[int, ...]
    _owner: dict[int, int] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def build(cls, num_logical: int, num_out_clbits: int, scheme: EccScheme, n_anc: int) -> "LogicalLayout":
        width = scheme.n_physical + n_anc
        ns = scheme.n_stabilizers
        blocks = []
        owner = {}
        for k in range(num_logical):
            base = k * width
            data = tuple(range(base, base + scheme.n_physical))
            anc = tuple(range(base + scheme.n_physical, base + width))
            syn = tuple(range(num_out_clbits + k * ns, num_out_clbits + (k + 1) * ns))
            blocks.append(LogicalBlock(data, anc, syn))
            for q in data + anc:
                owner[q] = k
        return cls(tuple(blocks), num_logical * width, num_out_clbits + num_logical * ns,
                   tuple(range(num_out_clbits)), owner)

    def owner(self, physical: int) -> int:
        return self._owner[physical]


def _check_input(c: Circuit, scheme: EccScheme) -> None:
    check(c)
    measured: set[int] = set()
    for op in c.ops:
        if op.kind is GateKind.RESET:
            raise UnsupportedGateError(op.kind, scheme.name)
        if any(q in measured for q in op.qubits):
            raise EccCompileError(f"logical qubit {op.qubits} is used after being measured")
        if op.kind is GateKind.MEASURE:
            measured.add(op.qubits[0])


def encode_pass(c: Circuit, cfg: EccConfig) -> tuple[Circuit, LogicalLayout]:
    scheme = cfg.code
    _check_input(c, scheme)
    layout = LogicalLayout.build(c.num_qubits, c.num_clbits, scheme, cfg.ancillas_per_block)
    ops: list[Operation] = []
    for blk in layout.blocks:
        ops += [op.remap(blk.data, tag=ENCODE) for op in scheme.encoder]
    ops += [op.retag(PENDING) for op in c.ops]
    out = c.with_ops(ops, num_qubits=layout.num_qubits, num_clbits=layout.num_clbits,
                     name=f"{c.name}_{scheme.name}" if c.name else scheme.name)
    return out, layout


def map_operations_pass(c: Circuit, layout: LogicalLayout, cfg: EccConfig) -> Circuit:
    scheme = cfg.code
    ops: list[Operation] = []
    for i, op in enumerate(c.ops):
        if op.tag != PENDING or op.kind is GateKind.MEASURE:
            ops.append(op)
            continue
        if op.kind not in scheme.supported_kinds:
            raise UnsupportedGateError(op.kind, scheme.name)
        blocks = [layout.blocks[q].data for q in op.qubits]
        frag = scheme.logical_fragment(op.kind, blocks, tag=f"{LOGICAL_PREFIX}{i}")
        if op.condition is not None:
            frag = [Operation(f.kind, f.qubits, f.clbits, op.condition, f.tag) for f in frag]
        ops += frag
    return c.with_ops(ops)


def _block_ops(scheme: EccScheme, blk: LogicalBlock) -> list[Operation]:
    return scheme.syndrome_block(blk.data, blk.ancillas, blk.syndrome_clbits[0], tag=CORRECT)


def insert_correction_pass(c: Circuit, layout: LogicalLayout, cfg: EccConfig) -> Circuit:
    """Count one use per logical operation per touched logical qubit; insert a
    syndrome block when a count reaches the frequency, and before each
    logical measurement if configured."""
    scheme = cfg.code
    uses = [0] * len(layout.blocks)
    ops: list[Operation] = []
    i = 0
    src = c.ops
    while i < len(src):
        op = src[i]
        if op.tag == PENDING and op.kind is GateKind.MEASURE:
            k = op.qubits[0]
            if cfg.correct_before_measure:
                ops += _block_ops(scheme, layout.blocks[k])
                uses[k] = 0
            ops.append(op)
            i += 1
            continue
        if not op.tag.startswith(LOGICAL_PREFIX):
            ops.append(op)
            i += 1
            continue
        touched: set[int] = set()
        j = i
        while j < len(src) and src[j].tag == op.tag:
            touched.update(layout.owner(q) for q in src[j].qubits)
            ops.append(src[j])
            j += 1
        for k in sorted(touched):
            uses[k] += 1
            if uses[k] >= cfg.correction_frequency:
                ops += _block_ops(scheme, layout.blocks[k])
                uses[k] = 0
        i = j
    return c.with_ops(ops)


def decode_pass(c: Circuit, layout: LogicalLayout, cfg: EccConfig) -> Circuit:
    scheme = cfg.code
    ops: list[Operation] = []
    for op in c.ops:
        if op.tag != PENDING:
            ops.append(op)
            continue
        if op.kind is not GateKind.MEASURE:
            raise EccCompileError(f"unmapped logical operation {op.kind.value} reached decoding")
        blk = layout.blocks[op.qubits[0]]
        ops += [d.remap(blk.data, tag=DECODE) for d in scheme.decoder]
        ops.append(measure(blk.data[scheme.readout_qubit], op.clbits[0], tag=DECODE))
    return c.with_ops(ops)


def apply_ecc(c: Circuit, cfg: EccConfig) -> Circuit:
    """Encode, map, insert corrections and decode."""
    enc, layout = encode_pass(c, cfg)
    out = map_operations_pass(enc, layout, cfg)
    out = insert_correction_pass(out, layout, cfg)
    return decode_pass(out, layout, cfg)


def compile_with_layout(c: Circuit, cfg: EccConfig) -> tuple[Circuit, LogicalLayout]:
    enc, layout = encode_pass(c, cfg)
    out = decode_pass(insert_correction_pass(map_operations_pass(enc, layout, cfg), layout, cfg), layout, cfg)
    return out, layout


def count_correction_blocks(c: Circuit, scheme: EccScheme | str) -> int:
    """Number of syndrome blocks in a compiled circuit."""
    if isinstance(scheme, str):
        scheme = get_scheme(scheme)
    n_meas = sum(op.tag == CORRECT and op.kind is GateKind.MEASURE for op in c.ops)
    return n_meas // scheme.n_stabilizers


# ---------------------------------------------------------------------------
# single-error oracle


def _oracle_circuit(scheme: EccScheme, error: PauliString | None, x_basis: bool) -> Circuit:
    n, a = scheme.n_physical, scheme.n_ancilla
    j = scheme.readout_qubit
    ops = [gate(GateKind.X, j)]
    if x_basis:
        ops.append(gate(GateKind.H, j))
    ops += list(scheme.encoder)
    if error is not None:
        ops += [gate(GateKind(lab.lower()), q) for q, lab in enumerate(error.ops) if lab != "I"]
    ops += scheme.syndrome_block(range(n), range(n, n + a), 0)
    ops += list(scheme.decoder)
    if x_basis:
        ops.append(gate(GateKind.H, j))
    ops += [measure(q, a + q) for q in range(n)]
    return Circuit(n + a, a + n, tuple(ops), f"{scheme.name}_oracle")


def correct_single_error_oracle(scheme: EccScheme | str, error: PauliString | tuple[int, str]) -> bool:
    """Does one correction round undo ``error`` on an encoded non-trivial state?

    The check runs with the input |1> and with |->, so both logical bit and
    phase flips are caught, and compares the exact distribution of every
    decoded data qubit against the error-free run.
    """
    if isinstance(scheme, str):
        scheme = get_scheme(scheme)
    if isinstance(error, tuple):
        error = PauliString.single(scheme.n_physical, *error)
    a = scheme.n_ancilla
    out_bits = range(a, a + scheme.n_physical)
    for x_basis in (False, True):
        ref = run_density(_oracle_circuit(scheme, None, x_basis)).marginal(out_bits)
        got = run_density(_oracle_circuit(scheme, error, x_basis)).marginal(out_bits)
        if ref.tvd(got) > 1e-9:
            return False
    return True

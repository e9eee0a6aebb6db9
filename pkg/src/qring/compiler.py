"""Compile circuits of single-qubit unitaries and controlled-Z into programs.

A single-qubit target U is realized as three teleported rotations inside the
fixed phase-shifter basis:

    U = exp(i phase) . Z_{pi/4} Ry(th3) Rx(th2) Ry(th1) Z_{pi/4}

with (th1, th2, th3) the YXY Euler angles of Z_{-pi/4} U Z_{-pi/4}.  The
emitted ``GATE q a b c`` line carries the angle columns in the order
(a, b, c) = (th3, th2, th1): the first column is the leftmost (last applied)
Euler factor, and the macro body teleports the third column first.  The
measurement byproducts are removed either explicitly (CORR) or by folding
their inverses into the next gate on the same qubit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import isa
from .isa import (
    AtomLit, BinOp, Call, Comment, Const, If, Instr, MacroDef, Name, Neg,
    Num, Program,
)
from .qstate import PAULI_X, PAULI_Y, PAULI_Z, IDENTITY, rot_x, rot_y, rot_z
from .device import WRAP_OUT, WRAP_BACK

Z_QUARTER = rot_z(math.pi / 4)
Z_QUARTER_INV = rot_z(-math.pi / 4)


# ---------------------------------------------------------------------------
# Euler decomposition
# ---------------------------------------------------------------------------

def euler_yxy(u: np.ndarray) -> tuple[float, float, float, float]:
    """YXY Euler angles: Ry(th3) Rx(th2) Ry(th1) = exp(-i phase) U.

    th2 is canonical in [0, pi]; th1, th3 in [0, 2pi); gimbal-degenerate
    inputs (th2 = 0 or pi) are resolved by th1 = 0.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("expected a 2x2 unitary")
    det = np.linalg.det(u)
    v = u * cmath.exp(-1j * cmath.phase(det) / 2)
    x, y = v[0, 0], v[1, 0]
    cb = math.hypot(x.real, y.real)
    sb = math.hypot(x.imag, y.imag)
    th2 = 2.0 * math.atan2(sb, cb)
    if sb < 1e-12:
        th1, th3 = 0.0, 2.0 * math.atan2(y.real, x.real)
    elif cb < 1e-12:
        th1, th3 = 0.0, -2.0 * math.atan2(-x.imag, -y.imag)
    else:
        s = math.atan2(y.real, x.real)
        d = math.atan2(-x.imag, -y.imag)
        th1, th3 = s + d, s - d
    th1 %= 2 * math.pi
    th3 %= 2 * math.pi
    m = rot_y(th3) @ rot_x(th2) @ rot_y(th1)
    idx = np.unravel_index(np.argmax(np.abs(m)), m.shape)
    phase = cmath.phase(u[idx] / m[idx])
    return th1, th2, th3, phase


def gate_columns(u: np.ndarray) -> tuple[float, float, float]:
    """GATE angle columns (th3, th2, th1) for target U on one photon."""
    th1, th2, th3, _ = euler_yxy(Z_QUARTER_INV @ u @ Z_QUARTER_INV)
    return th3, th2, th1


def compile_gate(u: np.ndarray, q: int) -> Call:
    """GATE invocation realizing U (up to global phase) on photon q."""
    a, b, c = gate_columns(u)
    return Call("GATE", (Name(f"q{q + 1}"), Num(a), Num(b), Num(c)))


# ---------------------------------------------------------------------------
# adaptive angles and byproduct bookkeeping
# ---------------------------------------------------------------------------

def adaptive_theta2(theta2: float, m1: int) -> float:
    """Second teleported angle: theta2 + pi if m1 = 0, -theta2 if m1 = 1."""
    return theta2 + math.pi if m1 == 0 else -theta2


def adaptive_theta3(theta3: float, m1: int, m2: int) -> float:
    """Third teleported angle: (-1)^(m1 xor m2 xor 1) (theta3 + pi(1-m2))."""
    return (-1.0) ** ((m1 ^ m2 ^ 1)) * (theta3 + math.pi * (1 - m2))


@dataclass(frozen=True)
class PauliError:
    """Byproduct Pauli letter with a phase tag (ignored in comparisons)."""

    letter: str  # 'I' | 'X' | 'Y' | 'Z'
    phase: complex = field(default=1.0 + 0j, compare=False)

    def matrix(self) -> np.ndarray:
        return self.phase * {"I": IDENTITY, "X": PAULI_X,
                             "Y": PAULI_Y, "Z": PAULI_Z}[self.letter]


_PAULI_TABLE = {
    (0, 0, 0): PauliError("Y", -1),
    (0, 0, 1): PauliError("I", -1),
    (0, 1, 0): PauliError("X", -1j),
    (0, 1, 1): PauliError("Z", 1),
    (1, 0, 0): PauliError("X", -1j),
    (1, 0, 1): PauliError("Z", 1),
    (1, 1, 0): PauliError("Y", -1),
    (1, 1, 1): PauliError("I", -1),
}


def pauli_error(m1: int, m2: int, m3: int) -> PauliError:
    """Byproduct letter left by a three-rotation gate on branch (m1,m2,m3)."""
    return _PAULI_TABLE[(m1 & 1, m2 & 1, m3 & 1)]


def residual_operator(m1: int, m2: int, m3: int) -> np.ndarray:
    """Exact byproduct operator (before correction), including the
    Rz(-pi/2) dressing that the X/Y letters carry inside the wrapper basis:

        R = Z_{pi/4} . sigma_z^(m1 xor m2) . sigma_y^(m3 xor 1) . Z_{-pi/4}
    """
    p = IDENTITY
    if (m1 ^ m2) & 1:
        p = PAULI_Z @ p
    if (m3 ^ 1) & 1:
        p = p @ PAULI_Y
    return Z_QUARTER @ p @ Z_QUARTER_INV


def correction_sequence(e: PauliError, q: int) -> list[isa.Stmt]:
    """Non-interacting pass sequence cancelling the dressed byproduct.

    The Z byproduct is bare and needs two |g1> passes; the X/Y byproducts
    carry an extra Rz(-pi/2) inside the wrapper basis, which a |g0> pass
    followed by a |g1> pass cancels (Y), with two more |g1> passes for X.
    """
    qn = Name(f"q{q + 1}")
    g0 = Instr("INIT", AtomLit("g0"))
    g1 = Instr("INIT", AtomLit("g1"))
    sctr = Call("SCTR", (qn,))
    if e.letter == "I":
        return []
    if e.letter == "Z":
        return [g1, sctr, sctr]
    if e.letter == "Y":
        return [g0, sctr, g1, sctr]
    if e.letter == "X":
        return [g0, sctr, g1, sctr, sctr, sctr]
    raise ValueError(f"unknown Pauli letter {e.letter!r}")


# ---------------------------------------------------------------------------
# macro prelude
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return str(Num(x))


def _cols_text(u: np.ndarray) -> str:
    return " ".join(_fmt(c) for c in gate_columns(u))


_BZ = WRAP_OUT                      # B Z_{pi/4}
_ZB = WRAP_BACK                     # Z_{pi/4} B
_BZ_INV = _BZ.conj().T
_ZB_INV = _ZB.conj().T

PRELUDE = f"""\
# Instruction set
# ---------------
# OPEN t ... open the switches at time t
# CLOS t ... close the switches at time t
# ROTX θ ... laser pulse rotates atom state
# ROTY θ ... laser pulse rotates atom state
# MEAS m ... measure atom state and store bit as m
# INIT Ψ ... initialize atom to |Ψ>=|g0>,|g1>,|+>

# Scatter photon q and return it to ring
define SCTR q:
\tOPEN t_q-Δt/2
\tCLOS t_q+Δt/2
\tOPEN N*Δt+t_q-Δt/2
\tCLOS N*Δt+t_q+Δt/2

# Explicitly correct byproduct errors after a gate
define CORR q m1 m2 m3:
\tif m3 == 0:
\t\tINIT |g0>
\t\tSCTR q
\t\tINIT |g1>
\t\tSCTR q
\tif m1 != m2:
\t\tINIT |g1>
\t\tSCTR q
\t\tSCTR q

# Single-qubit gate via Euler angles (θ1 = leftmost factor)
define GATE q θ1 θ2 θ3:
\tINIT |+>
\tSCTR q
\tROTX θ3
\tMEAS m1
\tINIT |+>
\tSCTR q
\tROTX (θ2+π*(1-m1))*(-1)^m1
\tMEAS m2
\tINIT |+>
\tSCTR q
\tROTX (θ1+π*(1-m2))*(-1)^(m1+m2+1)
\tMEAS m3
\tCORR q m1 m2 m3

# Swap photon q with atom state
define LOAD q:
\tSCTR q
\tROTX π
\tROTY π/2
\tSCTR q
\tROTX π
\tROTY π/2
\tSCTR q
\tROTX π/2

# Controlled-σz between photons q1, q2
define CTRZ q1 q2:
\tGATE q1 0 3π/4 -π/2
\tGATE q2 0 3π/4 -π/2
\tINIT |+>
\tSCTR q1
\tROTY -π/2
\tSCTR q2
\tROTY π/2
\tSCTR q1
\tMEAS m
\tGATE q1 (1-m)*π π/2 (5-2*m)*π/4
\tGATE q2 π/2 3π/4 0
"""

# Controlled-σz through two photon-atom swaps: 3 + 1 + 3 raw scatterings,
# with four wrapper-compensating gates.  The swap leaves (Z_{-pi/4} B+) after
# and (B+ Z_{-pi/4}) before on q1, and the middle pass wraps q2 as usual.
CZSW_MACRO = f"""\
define CZSW q1 q2:
\tGATE q1 {_cols_text(_ZB)}
\tGATE q2 {_cols_text(_BZ_INV)}
\tSCTR q1
\tROTX π
\tROTY π/2
\tSCTR q1
\tROTX π
\tROTY π/2
\tSCTR q1
\tSCTR q2
\tSCTR q1
\tROTX π
\tROTY π/2
\tSCTR q1
\tROTX π
\tROTY π/2
\tSCTR q1
\tGATE q1 {_cols_text(_BZ)}
\tGATE q2 {_cols_text(_ZB_INV)}
"""


def prelude_macros(extra_cz_swap: bool = False) -> dict[str, MacroDef]:
    text = PRELUDE + ("\n" + CZSW_MACRO if extra_cz_swap else "")
    return dict(isa.parse(text).macros)


# ---------------------------------------------------------------------------
# circuits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingleGate:
    q: int
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        if u.shape != (2, 2) or not np.allclose(
                u.conj().T @ u, IDENTITY, atol=1e-11):
            raise ValueError("single-qubit gate must be a 2x2 unitary")
        object.__setattr__(self, "u", u)


@dataclass(frozen=True)
class CzGate:
    q1: int
    q2: int

    def __post_init__(self):
        if self.q1 == self.q2:
            raise ValueError("controlled-Z needs two distinct qubits")


@dataclass(frozen=True)
class MeasureAll:
    pass


CircuitOp = SingleGate | CzGate | MeasureAll


@dataclass(frozen=True)
class CircuitSpec:
    n_photons: int
    ops: tuple[CircuitOp, ...]

    def __post_init__(self):
        for op in self.ops:
            qs = ()
            if isinstance(op, SingleGate):
                qs = (op.q,)
            elif isinstance(op, CzGate):
                qs = (op.q1, op.q2)
            for q in qs:
                if not 0 <= q < self.n_photons:
                    raise ValueError(f"qubit index {q} out of range")


class CircuitError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(
            message + (f" (line {line})" if line is not None else ""))


def parse_circuit(text: str) -> CircuitSpec:
    """Parse a circuit file.

    Records, one per line: ``single q <8 reals: row-major re/im of U>``,
    ``cz q1 q2``, ``measure_all``; ``#`` comments.
    """
    ops: list[CircuitOp] = []
    max_q = -1
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "single":
                if len(parts) != 10:
                    raise CircuitError(
                        "single takes a qubit and 8 reals", ln)
                q = int(parts[1])
                vals = [float(x) for x in parts[2:]]
                u = np.array([
                    [vals[0] + 1j * vals[1], vals[2] + 1j * vals[3]],
                    [vals[4] + 1j * vals[5], vals[6] + 1j * vals[7]],
                ])
                ops.append(SingleGate(q, u))
                max_q = max(max_q, q)
            elif kind == "cz":
                if len(parts) != 3:
                    raise CircuitError("cz takes two qubit indices", ln)
                q1, q2 = int(parts[1]), int(parts[2])
                ops.append(CzGate(q1, q2))
                max_q = max(max_q, q1, q2)
            elif kind == "measure_all":
                ops.append(MeasureAll())
            else:
                raise CircuitError(f"unknown record {kind!r}", ln)
        except (ValueError, CircuitError) as e:
            if isinstance(e, CircuitError):
                raise
            raise CircuitError(str(e), ln) from e
    return CircuitSpec(max_q + 1 if max_q >= 0 else 0, tuple(ops))


def serialize_circuit(spec: CircuitSpec) -> str:
    out = []
    for op in spec.ops:
        if isinstance(op, SingleGate):
            flat = []
            for r in range(2):
                for c in range(2):
                    flat += [f"{op.u[r, c].real:.17g}",
                             f"{op.u[r, c].imag:.17g}"]
            out.append(f"single {op.q} " + " ".join(flat))
        elif isinstance(op, CzGate):
            out.append(f"cz {op.q1} {op.q2}")
        else:
            out.append("measure_all")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# two-photon controlled-Z strategies
# ---------------------------------------------------------------------------

def compile_cz(q1: int, q2: int, strategy: str = "measured") -> list[isa.Stmt]:
    """Instruction statements realizing controlled-Z between photons q1, q2."""
    if q1 == q2:
        raise ValueError("controlled-Z needs two distinct qubits")
    n1, n2 = Name(f"q{q1 + 1}"), Name(f"q{q2 + 1}")
    if strategy == "measured":
        return [Call("CTRZ", (n1, n2))]
    if strategy == "via_swap":
        return [Call("CZSW", (n1, n2))]
    raise ValueError(f"unknown cz strategy {strategy!r}")


# ---------------------------------------------------------------------------
# whole-circuit compilation
# ---------------------------------------------------------------------------

def _inline_gate(q: int, u: np.ndarray, tag: str,
                 corr: bool) -> tuple[list[isa.Stmt], tuple[str, str, str]]:
    """Teleported-gate sequence with instance-unique registers (folded mode)."""
    a, b, c = gate_columns(u)
    qn = Name(f"q{q + 1}")
    r1, r2, r3 = f"m1_{tag}", f"m2_{tag}", f"m3_{tag}"
    pi_ = Const("π")
    m1, m2 = Name(r1), Name(r2)
    stmts: list[isa.Stmt] = [
        Instr("INIT", AtomLit("plus")),
        Call("SCTR", (qn,)),
        Instr("ROTX", Num(c)),
        Instr("MEAS", Name(r1)),
        Instr("INIT", AtomLit("plus")),
        Call("SCTR", (qn,)),
        Instr("ROTX", BinOp("*",
                            BinOp("+", Num(b),
                                  BinOp("*", pi_, BinOp("-", Num(1), m1))),
                            BinOp("^", Neg(Num(1)), m1))),
        Instr("MEAS", Name(r2)),
        Instr("INIT", AtomLit("plus")),
        Call("SCTR", (qn,)),
        Instr("ROTX", BinOp("*",
                            BinOp("+", Num(a),
                                  BinOp("*", pi_, BinOp("-", Num(1), m2))),
                            BinOp("^", Neg(Num(1)),
                                  BinOp("+", BinOp("+", m1, m2), Num(1))))),
        Instr("MEAS", Name(r3)),
    ]
    if corr:
        stmts.append(Call("CORR", (qn, Name(r1), Name(r2), Name(r3))))
    return stmts, (r1, r2, r3)


def compile_circuit(spec: CircuitSpec, mode: str = "explicit_corrections",
                    cz_strategy: str = "measured") -> Program:
    """Compile a circuit into a Program.

    explicit_corrections emits a CORR after every gate; folded suppresses
    CORR and conjugates each pending byproduct into the next single-qubit
    gate on the same qubit (falling back to explicit correction when a
    controlled-Z intervenes or no later gate exists).
    """
    if mode not in ("explicit_corrections", "folded"):
        raise ValueError(f"unknown mode {mode!r}")
    macros = prelude_macros(extra_cz_swap=(cz_strategy == "via_swap"))
    body: list[isa.Stmt] = []

    if mode == "explicit_corrections":
        for op in spec.ops:
            if isinstance(op, SingleGate):
                body.append(compile_gate(op.u, op.q))
            elif isinstance(op, CzGate):
                body.extend(compile_cz(op.q1, op.q2, cz_strategy))
            elif isinstance(op, MeasureAll):
                body.extend(_readout(spec.n_photons))
    else:
        body.extend(_compile_folded(spec, cz_strategy))

    return Program(macros=macros, body=tuple(body))


def _readout(n_photons: int) -> list[isa.Stmt]:
    out: list[isa.Stmt] = [Comment("State readout")]
    for q in range(n_photons):
        out.append(Call("LOAD", (Name(f"q{q + 1}"),)))
        out.append(Instr("MEAS", Name(f"b{q + 1}")))
    return out


def _foldable_next(spec: CircuitSpec, i: int) -> int | None:
    """Index of the next single on the same qubit with no intervening cz."""
    q = spec.ops[i].q
    for j in range(i + 1, len(spec.ops)):
        op = spec.ops[j]
        if isinstance(op, SingleGate) and op.q == q:
            return j
        if isinstance(op, CzGate) and q in (op.q1, op.q2):
            return None
    return None


def _case_if(reg_pair, m3_reg, want_ne: bool, want_m3: int,
             inner: list[isa.Stmt]) -> isa.Stmt:
    cond_inner = If(Name(m3_reg), "==", Num(want_m3), tuple(inner))
    op = "!=" if want_ne else "=="
    return If(Name(reg_pair[0]), op, Name(reg_pair[1]), (cond_inner,))


def _compile_folded(spec: CircuitSpec, cz_strategy: str) -> list[isa.Stmt]:
    body: list[isa.Stmt] = []
    # pending[i] = registers of the gate whose byproduct gate i must absorb
    pending: dict[int, tuple[str, str, str]] = {}
    fold_target: dict[int, int] = {}
    for i, op in enumerate(spec.ops):
        if isinstance(op, SingleGate):
            j = _foldable_next(spec, i)
            if j is not None:
                fold_target[i] = j

    for i, op in enumerate(spec.ops):
        if isinstance(op, CzGate):
            body.extend(compile_cz(op.q1, op.q2, cz_strategy))
            continue
        if isinstance(op, MeasureAll):
            body.extend(_readout(spec.n_photons))
            continue
        tag = str(i)
        absorbed = pending.pop(i, None)
        needs_corr = i not in fold_target
        if absorbed is None:
            stmts, regs = _inline_gate(op.q, op.u, tag, corr=needs_corr)
            body.extend(stmts)
        else:
            r1, r2, r3 = absorbed
            # four byproduct cases of the previous gate on this qubit; each
            # case re-measures the same instance registers (only one runs)
            for parity in (0, 1):          # m1 xor m2
                for m3 in (0, 1):
                    res = residual_operator(parity, 0, m3)
                    ueff = op.u @ res.conj().T
                    inner, regs = _inline_gate(op.q, ueff, tag,
                                               corr=needs_corr)
                    body.append(_case_if((r1, r2), r3, parity == 1, m3,
                                         inner))
        if i in fold_target:
            pending[fold_target[i]] = regs
    return body

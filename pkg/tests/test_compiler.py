import math

import numpy as np
import pytest

from qring import compiler, isa
from qring.compiler import (
    CircuitSpec, CzGate, MeasureAll, SingleGate, adaptive_theta2,
    adaptive_theta3, compile_cz, compile_circuit, compile_gate,
    correction_sequence, euler_yxy, gate_columns, parse_circuit,
    pauli_error, serialize_circuit,
)
from qring.qstate import rot_x, rot_y

import oracles

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def recompose(th1, th2, th3):
    return rot_y(th3) @ rot_x(th2) @ rot_y(th1)


def test_euler_identity():
    th1, th2, th3, phase = euler_yxy(np.eye(2, dtype=complex))
    assert (th1, th2, th3, phase) == (0.0, 0.0, 0.0, 0.0)


def test_euler_axis_aligned():
    th1, th2, th3, phase = euler_yxy(rot_x(0.7))
    assert th1 == pytest.approx(0.0)
    assert th2 == pytest.approx(0.7)
    assert th3 % (2 * math.pi) == pytest.approx(0.0, abs=1e-12)


def test_euler_random_recomposition(rng):
    for _ in range(50):
        u = oracles.random_unitary(rng)
        th1, th2, th3, phase = euler_yxy(u)
        assert 0.0 <= th2 <= math.pi + 1e-12
        err = np.max(np.abs(recompose(th1, th2, th3)
                            - np.exp(-1j * phase) * u))
        assert err < 1e-10


def test_euler_gimbal_degenerate():
    th1, th2, th3, _ = euler_yxy(rot_y(1.3))
    assert th1 == 0.0 and th2 == pytest.approx(0.0, abs=1e-12)
    assert th3 == pytest.approx(1.3)


def test_hadamard_gate_columns_match_reference():
    cols = gate_columns(H)
    assert [round(c, 3) for c in cols] == [5.668, 2.094, 0.615]


def test_compile_gate_text():
    call = compile_gate(H, 0)
    text = str(isa.pretty(isa.Program({}, (call,)))).strip()
    assert text.startswith("GATE q1 5.66")
    nums = [round(a.value, 3) for a in call.args[1:]]
    assert nums == [5.668, 2.094, 0.615]


def test_adaptive_theta2_cases():
    assert adaptive_theta2(0.7, 0) == pytest.approx(0.7 + math.pi)
    assert adaptive_theta2(0.7, 1) == pytest.approx(-0.7)
    assert adaptive_theta2(0.0, 0) == pytest.approx(math.pi)


def test_adaptive_theta3_four_cases():
    th = 0.9
    assert adaptive_theta3(th, 0, 0) == pytest.approx(-th - math.pi)
    assert adaptive_theta3(th, 0, 1) == pytest.approx(th)
    assert adaptive_theta3(th, 1, 0) == pytest.approx(th + math.pi)
    assert adaptive_theta3(th, 1, 1) == pytest.approx(-th)


def test_pauli_error_table():
    table = {
        (0, 0, 0): "Y", (0, 0, 1): "I", (0, 1, 0): "X", (0, 1, 1): "Z",
        (1, 0, 0): "X", (1, 0, 1): "Z", (1, 1, 0): "Y", (1, 1, 1): "I",
    }
    for bits, letter in table.items():
        assert pauli_error(*bits).letter == letter


def test_correction_sequences():
    assert correction_sequence(pauli_error(0, 0, 1), 0) == []
    z_seq = correction_sequence(pauli_error(0, 1, 1), 0)
    # two |g1>-initialized scatterings
    inits = [s for s in z_seq if isinstance(s, isa.Instr)]
    scats = [s for s in z_seq if isinstance(s, isa.Call)]
    assert len(inits) == 1 and inits[0].operand.which == "g1"
    assert len(scats) == 2


def test_correction_sequences_cancel_residuals():
    """Each sequence's photon operator inverts the dressed byproduct."""
    g0_pass = oracles.Z4 @ oracles.B @ oracles.B @ oracles.Z4
    g1_pass = oracles.Z4 @ oracles.B @ oracles.SZ @ oracles.B @ oracles.Z4
    ops = {"g0": g0_pass, "g1": g1_pass}
    for bits in [(0, 0, 0), (0, 1, 0), (0, 1, 1), (1, 1, 1)]:
        seq = correction_sequence(pauli_error(*bits), 0)
        total = np.eye(2, dtype=complex)
        current = None
        for s in seq:
            if isinstance(s, isa.Instr):
                current = s.operand.which
            else:
                total = ops[current] @ total
        residual = compiler.residual_operator(*bits)
        net = total @ residual
        phase = net[0, 0] / 1.0 if abs(net[0, 0]) > 0.1 else net[0, 1]
        assert np.allclose(net, phase * np.eye(2), atol=1e-12), bits


def test_compile_cz_measured_starts_with_wrapper_gate():
    stmts = compile_cz(0, 1, "measured")
    assert len(stmts) == 1 and stmts[0].name == "CTRZ"
    macro = compiler.prelude_macros()["CTRZ"]
    first = macro.body[0]
    assert isinstance(first, isa.Call) and first.name == "GATE"
    vals = [isa.eval_expr(a, {}) for a in first.args[1:]]
    assert vals[0] == pytest.approx(0.0)
    assert vals[1] == pytest.approx(3 * math.pi / 4)
    assert vals[2] == pytest.approx(-math.pi / 2)


def test_compile_cz_via_swap_seven_scatterings():
    macros = compiler.prelude_macros(extra_cz_swap=True)
    body = macros["CZSW"].body
    n_sctr = sum(1 for s in body
                 if isinstance(s, isa.Call) and s.name == "SCTR")
    assert n_sctr == 7


def test_compile_cz_equal_indices():
    with pytest.raises(ValueError):
        compile_cz(1, 1)


def test_circuit_file_roundtrip(rng):
    spec = CircuitSpec(3, (
        SingleGate(0, oracles.random_unitary(rng)),
        CzGate(1, 2),
        SingleGate(2, oracles.random_unitary(rng)),
        MeasureAll(),
    ))
    text = serialize_circuit(spec)
    back = parse_circuit(text)
    assert back.n_photons == 3
    assert len(back.ops) == 4
    assert np.allclose(back.ops[0].u, spec.ops[0].u)
    assert isinstance(back.ops[3], MeasureAll)


def test_circuit_parse_errors():
    with pytest.raises(compiler.CircuitError, match="line 1"):
        parse_circuit("single 0 1 2 3\n")
    with pytest.raises(compiler.CircuitError, match="unknown record"):
        parse_circuit("entangle 0 1\n")
    with pytest.raises(ValueError):
        parse_circuit("cz 0 0\n")


def test_nonunitary_single_rejected():
    with pytest.raises(ValueError, match="unitary"):
        SingleGate(0, np.array([[1, 1], [0, 1]], dtype=complex))


def test_compile_empty_circuit():
    prog = compile_circuit(CircuitSpec(0, ()))
    assert prog.body == ()
    assert set(prog.macros) == {"SCTR", "CORR", "GATE", "LOAD", "CTRZ"}


def test_compile_circuit_readout_block():
    prog = compile_circuit(CircuitSpec(2, (MeasureAll(),)))
    calls = [s for s in prog.body if isinstance(s, isa.Call)]
    meas = [s for s in prog.body
            if isinstance(s, isa.Instr) and s.opcode == "MEAS"]
    assert [c.name for c in calls] == ["LOAD", "LOAD"]
    assert [m.operand.ident for m in meas] == ["b1", "b2"]

"""Generate the bundled example corpus: qft3.circuit, qft3.sdq, qft3.mat.

The three-qubit Fourier-transform circuit uses the swap-free layout
(Hadamards and controlled-phase gates only), so the transform appears with
bit-reversed output qubit order; qft3.mat stores exactly the unitary the
circuit realizes, which equals the DFT matrix with bit-reversed rows.
The .sdq file is emitted with gate angles rounded to 3 decimals.
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from qring import compiler, isa, vm  # noqa: E402
from qring.cli import save_unitary  # noqa: E402
from qring.qstate import rot_z  # noqa: E402

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def cp_ops(c, t, phi):
    """CP(phi) between control c and target t via two controlled-Z.

    CP(phi) = e^{-i phi/4} Rz_c(phi/2) . CNOT . Rz_t(-phi/2) . CNOT
              . Rz_t(phi/2) with CNOT = H_t cZ H_t; adjacent target singles
    are merged.
    """
    return [
        compiler.SingleGate(t, H @ rot_z(phi / 2)),
        compiler.CzGate(c, t),
        compiler.SingleGate(t, H @ rot_z(-phi / 2) @ H),
        compiler.CzGate(c, t),
        compiler.SingleGate(t, H),
        compiler.SingleGate(c, rot_z(phi / 2)),
    ]


def qft3_ops():
    ops = [compiler.SingleGate(0, H)]
    ops += cp_ops(1, 0, np.pi / 2)
    ops += cp_ops(2, 0, np.pi / 4)
    ops += [compiler.SingleGate(1, H)]
    ops += cp_ops(2, 1, np.pi / 2)
    ops += [compiler.SingleGate(2, H)]
    ops += [compiler.MeasureAll()]
    return tuple(ops)


def embed1(u, q, n=3):
    ops = [np.eye(2, dtype=complex)] * n
    ops[q] = u
    full = ops[-1]
    for o in reversed(ops[:-1]):
        full = np.kron(full, o)
    return full


def embed_cz(q1, q2, n=3):
    d = np.ones(2 ** n, dtype=complex)
    for i in range(2 ** n):
        if (i >> q1) & 1 and (i >> q2) & 1:
            d[i] = -1
    return np.diag(d)


def circuit_matrix(ops, n=3):
    m = np.eye(2 ** n, dtype=complex)
    for op in ops:
        if isinstance(op, compiler.SingleGate):
            m = embed1(op.u, op.q, n) @ m
        elif isinstance(op, compiler.CzGate):
            m = embed_cz(op.q1, op.q2, n) @ m
    return m


def round_angles(program, places=3):
    def walk(stmts):
        out = []
        for s in stmts:
            if isinstance(s, isa.Call) and s.name == "GATE":
                args = [s.args[0]] + [
                    isa.Num(round(a.value, places))
                    if isinstance(a, isa.Num) else a
                    for a in s.args[1:]
                ]
                out.append(isa.Call(s.name, tuple(args), s.line))
            elif isinstance(s, isa.If):
                out.append(isa.If(s.lhs, s.op, s.rhs, walk(s.body), s.line))
            else:
                out.append(s)
        return tuple(out)

    return isa.Program(macros=program.macros, body=walk(program.body))


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "src", "qring",
                           "data")
    os.makedirs(out_dir, exist_ok=True)

    ops = qft3_ops()
    spec = compiler.CircuitSpec(3, ops)
    target = circuit_matrix(ops)

    # identify the realized matrix against the DFT
    w = np.exp(2j * np.pi / 8)
    f8 = np.array([[w ** (j * k) for k in range(8)] for j in range(8)])
    f8 /= np.sqrt(8)
    br = [int(format(i, "03b")[::-1], 2) for i in range(8)]
    for name, cand in [("F8", f8), ("F8 bit-reversed rows", f8[br, :]),
                       ("F8 bit-reversed cols", f8[:, br])]:
        ph = target[0, 0] / cand[0, 0]
        if abs(abs(ph) - 1) < 1e-9 and np.allclose(target, ph * cand,
                                                   atol=1e-11):
            print(f"circuit realizes: {name} (up to global phase)")

    with open(os.path.join(out_dir, "qft3.circuit"), "w") as fh:
        fh.write("# three-qubit Fourier transform (swap-free layout)\n")
        fh.write(compiler.serialize_circuit(spec))
    save_unitary(os.path.join(out_dir, "qft3.mat"), target)

    program = compiler.compile_circuit(spec, mode="explicit_corrections")
    cfg = vm.RunConfig(device=isa.DeviceConfig(n_photons=3), seed=11)
    worst_full = vm.verify_program(program, target, cfg)
    print(f"full-precision compile verifies at {worst_full:.3e}")

    rounded = round_angles(program)
    with open(os.path.join(out_dir, "qft3.sdq"), "w") as fh:
        fh.write("# three-qubit Fourier transform, gate angles at 3 "
                 "decimals\n")
        fh.write(isa.pretty(rounded))
    worst_rounded = vm.verify_program(rounded, target, cfg)
    print(f"3-decimal compile verifies at {worst_rounded:.3e}")


if __name__ == "__main__":
    main()

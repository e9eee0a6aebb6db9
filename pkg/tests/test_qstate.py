import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qring import qstate
from qring.qstate import (
    StateVector, apply_1q, apply_cz, fidelity_up_to_phase, make_gate, measure,
)

import oracles


def test_rz_quarter_matrix():
    g = make_gate("rz", np.pi / 4)
    want = np.diag([np.exp(-1j * np.pi / 8), np.exp(1j * np.pi / 8)])
    assert np.allclose(g, want, atol=1e-15)


def test_rx_zero_is_identity():
    assert np.allclose(make_gate("rx", 0.0), np.eye(2), atol=1e-15)


def test_beamsplitter_squared_is_i_sigma_x():
    b = make_gate("beamsplitter")
    assert np.allclose(b @ b, 1j * oracles.SX, atol=1e-12)


def test_beamsplitter_conjugates_z_to_z():
    b = make_gate("beamsplitter")
    assert np.allclose(b @ oracles.SZ @ b, oracles.SZ, atol=1e-12)


def test_make_gate_errors():
    with pytest.raises(ValueError):
        make_gate("hadamard")
    with pytest.raises(ValueError):
        make_gate("rx")
    with pytest.raises(ValueError):
        make_gate("ry", float("nan"))
    with pytest.raises(ValueError):
        make_gate("pauli_x", 0.3)


def test_gates_are_unitary(rng):
    for kind in ("rx", "ry", "rz"):
        g = make_gate(kind, rng.uniform(0, 2 * np.pi))
        assert np.allclose(g.conj().T @ g, np.eye(2), atol=1e-12)
    for kind in ("beamsplitter", "pauli_x", "pauli_y", "pauli_z", "identity"):
        g = make_gate(kind)
        assert np.allclose(g.conj().T @ g, np.eye(2), atol=1e-12)


def test_apply_identity_keeps_state(rng):
    st0 = StateVector(oracles.random_state(rng, 8), 2)
    out = apply_1q(st0, 1, make_gate("identity"))
    assert np.allclose(out.amplitudes, st0.amplitudes)


def test_beamsplitter_on_zero():
    st0 = StateVector.ground(1)
    out = apply_1q(st0, 0, make_gate("beamsplitter"))
    want = np.array([1, 1j, 0, 0]) / np.sqrt(2)
    assert np.allclose(out.amplitudes, want)


def test_rz_diagonal_action():
    amps = np.array([0, 1, 0, 0], dtype=complex)  # photon |1>, atom |g0>
    st0 = StateVector(amps, 1)
    out = apply_1q(st0, 0, make_gate("rz", np.pi / 4))
    assert np.allclose(out.amplitudes[1], np.exp(1j * np.pi / 8))


def test_apply_1q_matches_tensor_oracle(rng):
    for n_photons in (1, 2):
        nq = n_photons + 1
        psi = oracles.random_state(rng, 2 ** nq)
        for q in range(nq):
            u = oracles.random_unitary(rng)
            got = apply_1q(StateVector(psi, n_photons), q, u)
            want = oracles.embed_1q(u, q, nq) @ psi
            assert np.allclose(got.amplitudes, want, atol=1e-12)


def test_apply_1q_index_error(rng):
    st0 = StateVector.ground(1)
    with pytest.raises(IndexError):
        apply_1q(st0, 2, make_gate("identity"))


def test_cz_basis_action():
    # two photons, atom |g0>; amplitude index = q0 + 2 q1 + 4 atom
    for k, sign in [(0, 1), (1, 1), (2, 1), (3, -1)]:
        amps = np.zeros(8, dtype=complex)
        amps[k] = 1
        out = apply_cz(StateVector(amps, 2), 0, 1)
        assert out.amplitudes[k] == sign


def test_cz_on_plus_plus():
    plus = np.array([1, 1]) / np.sqrt(2)
    st0 = StateVector.from_photons(np.kron(plus, plus),
                                   np.array([1, 0], dtype=complex))
    out = apply_cz(st0, 0, 1)
    want = np.array([1, 1, 1, -1]) / 2
    assert np.allclose(out.amplitudes[:4], want)


def test_cz_involution(rng):
    psi = oracles.random_state(rng, 8)
    st0 = StateVector(psi, 2)
    out = apply_cz(apply_cz(st0, 0, 2), 0, 2)
    assert fidelity_up_to_phase(out, st0) > 1 - 1e-12
    assert np.allclose(out.amplitudes, st0.amplitudes, atol=1e-12)


def test_cz_errors():
    st0 = StateVector.ground(1)
    with pytest.raises(ValueError):
        apply_cz(st0, 1, 1)
    with pytest.raises(IndexError):
        apply_cz(st0, 0, 5)


def test_measure_certain_outcome():
    st0 = StateVector.ground(1)  # atom |g0>
    bit, out, prob = measure(st0, 1, 0.99)
    assert bit == 0 and prob == pytest.approx(1.0)
    assert np.allclose(out.amplitudes, st0.amplitudes)


def test_measure_plus_atom():
    plus = np.array([1, 1]) / np.sqrt(2)
    st0 = StateVector.from_photons(np.array([1, 0], dtype=complex), plus)
    bit, out, prob = measure(st0, 1, 0.3)
    assert bit == 0 and prob == pytest.approx(0.5)
    photons, atom = out.split_product()
    assert abs(abs(atom[0]) - 1) < 1e-12


def test_measure_born_rule(rng):
    a, b = 0.6, 0.8
    st0 = StateVector.from_photons(np.array([1, 0], dtype=complex),
                                   np.array([a, b], dtype=complex))
    bit, out, prob = measure(st0, 1, a ** 2 + 1e-6)  # draw >= |a|^2
    assert bit == 1 and prob == pytest.approx(b ** 2)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


def test_measure_draw_range():
    with pytest.raises(ValueError):
        measure(StateVector.ground(0), 0, 1.0)


def test_fidelity_invariances(rng):
    psi = oracles.random_state(rng, 4)
    a = StateVector(psi, 1)
    b = StateVector(psi * np.exp(0.7j), 1)
    assert fidelity_up_to_phase(a, a) == pytest.approx(1.0)
    assert fidelity_up_to_phase(a, b) == pytest.approx(1.0)
    e0 = StateVector(np.array([1, 0, 0, 0], dtype=complex), 1)
    e1 = StateVector(np.array([0, 1, 0, 0], dtype=complex), 1)
    assert fidelity_up_to_phase(e0, e1) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        fidelity_up_to_phase(np.zeros(2), np.zeros(4))


def test_survival_validation():
    with pytest.raises(ValueError):
        StateVector(np.array([1, 0], dtype=complex), 0, survival=1.5)


@settings(max_examples=40, deadline=None)
@given(kind=st.sampled_from(["rx", "ry", "rz"]),
       angle=st.floats(-10, 10, allow_nan=False),
       seed=st.integers(0, 2 ** 31))
def test_norm_preserved_property(kind, angle, seed):
    r = np.random.default_rng(seed)
    psi = oracles.random_state(r, 4)
    out = apply_1q(StateVector(psi, 1), r.integers(0, 2),
                   make_gate(kind, angle))
    assert out.norm() == pytest.approx(1.0, abs=1e-12)

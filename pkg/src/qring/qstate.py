"""Dense state vector for n photonic qubits plus one atomic qubit.

Qubit ordering is little-endian and fixed: photonic qubit j is bit j of the
amplitude index (photon j occupies time bin j), and the atom is the last
qubit, index ``n_photons``.  Adding photons therefore never renumbers the
atom.

All operations are pure: they return new ``StateVector`` values and never
mutate shared state.  A classical ``survival`` scalar rides along with the
amplitudes to account for heralded photon loss; it is multiplicative and
never affects the (always unit-norm) quantum amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

NORM_TOL = 1e-9
MATRIX_TOL = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

# 50:50 beamsplitter between the two scattering-unit arms; equals Rx(-pi/2).
BEAMSPLITTER = np.array([[1, 1j], [1j, 1]], dtype=complex) / np.sqrt(2)


def rot_x(theta: float) -> np.ndarray:
    """Rx(theta) = exp(-i sigma_x theta/2)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def rot_y(theta: float) -> np.ndarray:
    """Ry(theta) = exp(-i sigma_y theta/2)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rot_z(theta: float) -> np.ndarray:
    """Rz(theta) = diag(exp(-i theta/2), exp(+i theta/2))."""
    return np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)])


_GATE_BUILDERS = {
    "rx": rot_x,
    "ry": rot_y,
    "rz": rot_z,
}
_FIXED_GATES = {
    "beamsplitter": BEAMSPLITTER,
    "pauli_x": PAULI_X,
    "pauli_y": PAULI_Y,
    "pauli_z": PAULI_Z,
    "identity": IDENTITY,
}


def make_gate(kind: str, angle: float | None = None) -> np.ndarray:
    """Build one of the fixed-convention 2x2 gates.

    ``kind`` is one of rx, ry, rz, beamsplitter, pauli_x, pauli_y, pauli_z,
    identity; rotations require ``angle`` (radians), the rest forbid it.
    """
    if kind in _GATE_BUILDERS:
        if angle is None:
            raise ValueError(f"gate kind {kind!r} requires an angle")
        if not np.isfinite(angle):
            raise ValueError(f"non-finite angle {angle!r}")
        return _GATE_BUILDERS[kind](float(angle))
    if kind in _FIXED_GATES:
        if angle is not None:
            raise ValueError(f"gate kind {kind!r} takes no angle")
        return _FIXED_GATES[kind].copy()
    raise ValueError(f"unknown gate kind {kind!r}")


def assert_unitary(g: np.ndarray, tol: float = MATRIX_TOL) -> None:
    g = np.asarray(g, dtype=complex)
    if g.shape != (2, 2):
        raise ValueError(f"expected 2x2 matrix, got shape {g.shape}")
    if not np.allclose(g.conj().T @ g, IDENTITY, atol=max(tol, 1e-12) * 10):
        raise ValueError("matrix is not unitary")


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over (n photons + 1 atom) qubits plus a survival scalar."""

    amplitudes: np.ndarray
    n_photons: int
    survival: float = 1.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        expected = 2 ** (self.n_photons + 1)
        if amps.shape != (expected,):
            raise ValueError(
                f"amplitude vector has length {amps.shape}, expected {expected}"
            )
        object.__setattr__(self, "amplitudes", amps)
        if not (0.0 <= self.survival <= 1.0 + 1e-12):
            raise ValueError(f"survival {self.survival} outside [0, 1]")

    @classmethod
    def ground(cls, n_photons: int) -> "StateVector":
        """All photons in |0> (clockwise), atom in |g0>."""
        amps = np.zeros(2 ** (n_photons + 1), dtype=complex)
        amps[0] = 1.0
        return cls(amps, n_photons)

    @classmethod
    def from_photons(cls, photon_amps: np.ndarray, atom_amps: np.ndarray,
                     survival: float = 1.0) -> "StateVector":
        """Product state (photons) x (atom); photon vector length 2^n."""
        photon_amps = np.asarray(photon_amps, dtype=complex)
        n = int(np.log2(photon_amps.size))
        if 2 ** n != photon_amps.size:
            raise ValueError("photon amplitude length must be a power of two")
        amps = np.kron(np.asarray(atom_amps, dtype=complex), photon_amps)
        amps = amps / np.linalg.norm(amps)
        return cls(amps, n, survival)

    @property
    def n_qubits(self) -> int:
        return self.n_photons + 1

    @property
    def atom_index(self) -> int:
        return self.n_photons

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def with_survival(self, survival: float) -> "StateVector":
        return replace(self, survival=survival)

    def photon_block(self) -> np.ndarray:
        """Amplitudes reshaped to (2^n_photons, 2) with the atom as column."""
        return self.amplitudes.reshape(2 ** self.n_photons, 2, order="F")

    def split_product(self, tol: float = 1e-7):
        """Split into (photon vector, atom vector); raises if entangled."""
        block = self.photon_block()
        u, s, vt = np.linalg.svd(block, full_matrices=False)
        if s[1] > tol:
            raise ValueError(
                f"atom is entangled with the photons (schmidt weights {s})"
            )
        return u[:, 0] * s[0], vt[0]

    def atom_purity(self) -> float:
        """Purity tr(rho_atom^2) of the atom's reduced state."""
        block = self.photon_block()
        rho = block.conj().T @ block
        return float(np.real(np.trace(rho @ rho)))


def _check_qubit(state: StateVector, q: int) -> None:
    if not 0 <= q <= state.n_photons:
        raise IndexError(
            f"qubit index {q} out of range for {state.n_photons} photons + atom"
        )


def apply_1q(state: StateVector, q: int, g: np.ndarray) -> StateVector:
    """Apply a 2x2 gate to qubit q (atom is q = n_photons)."""
    _check_qubit(state, q)
    g = np.asarray(g, dtype=complex)
    if g.shape != (2, 2):
        raise ValueError(f"expected 2x2 gate, got {g.shape}")
    nq = state.n_qubits
    st = state.amplitudes.reshape([2] * nq, order="F")
    st = np.moveaxis(st, q, 0)
    st = (g @ st.reshape(2, -1)).reshape([2] + [2] * (nq - 1))
    st = np.moveaxis(st, 0, q)
    amps = np.ascontiguousarray(st.reshape(-1, order="F"))
    return StateVector(amps, state.n_photons, state.survival)


def apply_cz(state: StateVector, q1: int, q2: int) -> StateVector:
    """Controlled-Z: negate amplitudes with both qubits in |1>."""
    if q1 == q2:
        raise ValueError("controlled-Z needs two distinct qubits")
    _check_qubit(state, q1)
    _check_qubit(state, q2)
    idx = np.arange(state.amplitudes.size)
    mask = ((idx >> q1) & 1).astype(bool) & ((idx >> q2) & 1).astype(bool)
    amps = state.amplitudes.copy()
    amps[mask] *= -1
    return StateVector(amps, state.n_photons, state.survival)


def measure(state: StateVector, q: int, draw: float):
    """Projective measurement of qubit q in the computational basis.

    ``draw`` is a uniform [0, 1) sample: outcome 0 iff draw < P(0).
    Returns (bit, collapsed renormalized state, probability of that outcome).
    """
    _check_qubit(state, q)
    if not 0.0 <= draw < 1.0:
        raise ValueError(f"draw {draw} outside [0, 1)")
    idx = np.arange(state.amplitudes.size)
    mask1 = ((idx >> q) & 1).astype(bool)
    p1 = float(np.sum(np.abs(state.amplitudes[mask1]) ** 2))
    p0 = 1.0 - p1
    bit = 0 if draw < p0 else 1
    prob = p0 if bit == 0 else p1
    if prob <= 1e-14:
        raise ValueError(
            f"measurement collapsed onto a zero-probability branch (p={prob})"
        )
    keep = mask1 if bit == 1 else ~mask1
    amps = np.where(keep, state.amplitudes, 0.0) / np.sqrt(prob)
    return bit, StateVector(amps, state.n_photons, state.survival), prob


def project(state: StateVector, q: int, bit: int):
    """Project qubit q onto ``bit`` without sampling.

    Returns (collapsed state or None if the branch has zero weight,
    branch probability).  Used by the exhaustive branch enumerator.
    """
    _check_qubit(state, q)
    idx = np.arange(state.amplitudes.size)
    mask1 = ((idx >> q) & 1).astype(bool)
    keep = mask1 if bit == 1 else ~mask1
    prob = float(np.sum(np.abs(state.amplitudes[keep]) ** 2))
    if prob < 1e-14:
        return None, prob
    amps = np.where(keep, state.amplitudes, 0.0) / np.sqrt(prob)
    return StateVector(amps, state.n_photons, state.survival), prob


def fidelity_up_to_phase(a: StateVector | np.ndarray,
                         b: StateVector | np.ndarray) -> float:
    """|<a|b>| -- insensitive to global phase."""
    va = a.amplitudes if isinstance(a, StateVector) else np.asarray(a)
    vb = b.amplitudes if isinstance(b, StateVector) else np.asarray(b)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    return float(abs(np.vdot(va, vb)))

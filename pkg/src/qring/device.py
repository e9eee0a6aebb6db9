"""Logical semantics of the ring device.

One pass of photon j through the scattering unit applies

    zeta = (Z_{pi/4} B)_j . cZ(j, atom) . (B Z_{pi/4})_j

where B is the 50:50 beamsplitter and Z_{pi/4} the fixed phase shifter.  The
outgoing wrapper is ``B Z_{pi/4}`` (shifter first), the return wrapper is
``Z_{pi/4} B``; the counter-propagation relabeling on the return trip is
absorbed into this logical operator.

A teleported rotation prepares the atom in |+>, scatters, applies Rx(-theta)
to the atom and measures it; the photon is left with

    Z_{pi/4} . sigma_z . (-sigma_y)^(m xor 1) . Ry(theta) . Z_{pi/4}

up to a global phase (probability exactly 1/2 per outcome).  Atom rotations
and readout are treated as ideal.
"""

from __future__ import annotations

import numpy as np

from . import qstate
from .qstate import (
    StateVector, apply_1q, apply_cz, measure, rot_x, rot_y, rot_z,
    BEAMSPLITTER,
)

Z_QUARTER = rot_z(np.pi / 4)

# photon-side wrappers of a scattering pass
WRAP_OUT = BEAMSPLITTER @ Z_QUARTER       # ring -> scattering unit
WRAP_BACK = Z_QUARTER @ BEAMSPLITTER      # scattering unit -> ring

ATOM_STATES = {
    "g0": np.array([1, 0], dtype=complex),
    "g1": np.array([0, 1], dtype=complex),
    "plus": np.array([1, 1], dtype=complex) / np.sqrt(2),
}

PURITY_TOL = 1e-9


def init_atom(state: StateVector, which: str) -> StateVector:
    """Reset the atom to |g0>, |g1> or |+>.

    Requires the atom to be disentangled from the photons: resetting an
    entangled atom would be a non-unitary erasure, so the compiler must
    always measure before INIT.
    """
    if which not in ATOM_STATES:
        raise ValueError(f"unknown atom state {which!r}")
    if state.atom_purity() < 1.0 - PURITY_TOL:
        raise ValueError(
            "INIT on an atom entangled with the photons "
            f"(purity {state.atom_purity():.6f})"
        )
    photons, _ = state.split_product()
    photons = photons / np.linalg.norm(photons)
    amps = np.kron(ATOM_STATES[which], photons)
    return StateVector(amps, state.n_photons, state.survival)


def scatter_pass(state: StateVector, j: int,
                 survival_factor: float = 1.0) -> StateVector:
    """One round trip of photon j through the scattering unit.

    ``survival_factor`` is the per-cycle heralded-loss factor supplied by
    the executor (1 - L); it multiplies the classical survival only.
    """
    if not 0 <= j < state.n_photons:
        raise IndexError(f"photon index {j} out of range")
    out = apply_1q(state, j, WRAP_OUT)
    out = apply_cz(out, j, state.atom_index)
    out = apply_1q(out, j, WRAP_BACK)
    return out.with_survival(out.survival * survival_factor)


def teleported_rotation(state: StateVector, j: int, theta: float,
                        draw: float):
    """Teleport an Ry(theta)-type rotation onto photon j.

    Initializes the atom to |+>, scatters photon j, applies Rx(-theta) to
    the atom and measures it.  Returns (m, new state).
    """
    st = init_atom(state, "plus")
    st = scatter_pass(st, j)
    st = apply_1q(st, st.atom_index, rot_x(-theta))
    m, st, _prob = measure(st, st.atom_index, draw)
    return m, st


# Atom rotation between the swap scatterings: Ry(pi/2) . Rx(pi).
SWAP_INTERLEAVE = rot_y(np.pi / 2) @ rot_x(np.pi)


def swap_photon_atom(state: StateVector, j: int) -> StateVector:
    """Exchange the states of photon j and the atom (SWAP up to phase).

    Three scattering passes interleaved with Ry(pi/2).Rx(pi) atom rotations
    equal SWAP once the photon-side wrappers are compensated: the net map is

        (B Z_{pi/4})_j . zeta rho zeta rho zeta . (Z_{pi/4} B)_j = -SWAP.
    """
    a = state.atom_index
    st = apply_1q(state, j, WRAP_BACK)
    st = scatter_pass(st, j)
    st = apply_1q(st, a, SWAP_INTERLEAVE)
    st = scatter_pass(st, j)
    st = apply_1q(st, a, SWAP_INTERLEAVE)
    st = scatter_pass(st, j)
    st = apply_1q(st, j, WRAP_OUT)
    return st


def noninteracting_pass_g0() -> np.ndarray:
    """Photon operator of a pass with the atom in |g0> (mirror-like)."""
    return WRAP_BACK @ WRAP_OUT


def noninteracting_pass_g1() -> np.ndarray:
    """Photon operator of a pass with the atom in |g1>."""
    return WRAP_BACK @ qstate.PAULI_Z @ WRAP_OUT

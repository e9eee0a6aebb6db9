"""qring: compiler and exact simulator for a single-atom, time-multiplexed
photonic quantum processor.

Photonic qubits circulate in a storage ring; every gate is realized by
routing one photon at a time through a scattering unit containing a single
atom-cavity system, rotating the atom and projectively measuring it.  The
package compiles circuits of single-qubit unitaries and controlled-Z gates
into the six-primitive instruction set of the device, executes the programs
on a state vector with classical feedforward, and reproduces the transport
(pulse-shape / leakage / circuit-depth) analysis of the scattering unit.
"""

from .qstate import (
    StateVector, make_gate, apply_1q, apply_cz, measure,
    fidelity_up_to_phase,
)
from .device import (
    init_atom, scatter_pass, teleported_rotation, swap_photon_atom,
)
from .isa import DeviceConfig, Program, parse, pretty, expand, validate_timing
from .compiler import (
    CircuitSpec, SingleGate, CzGate, MeasureAll, PauliError,
    euler_yxy, compile_gate, compile_cz, compile_circuit,
    adaptive_theta2, adaptive_theta3, pauli_error, correction_sequence,
    parse_circuit, serialize_circuit,
)
from .vm import (
    RunConfig, BranchResult, run_sampled, run_branches, verify_program,
    survival_of, render_run_report,
)
from .transport import (
    CavityParams, PulseGrid, TransportResult, reflection_coefficient,
    propagate_pulse, shape_fidelity, average_leakage, delay_between,
    corrected_plus_infidelity, max_depth, sweep_cooperativity,
)

__version__ = "0.1.0"

import numpy as np
import pytest

from qring import compiler, isa, vm
from qring.isa import DeviceConfig
from qring.qstate import StateVector
from qring.vm import RunConfig, run_branches, run_sampled, verify_program

import oracles

PRELUDE = compiler.PRELUDE


def parse_with_prelude(body):
    return isa.parse(PRELUDE + body)


def test_fair_coin_frequencies():
    prog = isa.parse("INIT |+>\nMEAS m\n")
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=42, shots=1000)
    results = run_sampled(prog, cfg)
    freq0 = sum(1 for r in results if r.outcome == "0") / len(results)
    assert 0.45 <= freq0 <= 0.55
    for r in results:
        assert r.probability == pytest.approx(0.5)


def test_sampled_determinism():
    prog = parse_with_prelude("GATE q1 1.0 2.0 3.0\n")
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=7, shots=20)
    a = run_sampled(prog, cfg)
    b = run_sampled(prog, cfg)
    for ra, rb in zip(a, b):
        assert ra.outcome == rb.outcome
        assert ra.probability == rb.probability
        assert np.array_equal(ra.state.amplitudes, rb.state.amplitudes)
    assert vm.render_run_report(7, 20, a) == vm.render_run_report(7, 20, b)


def test_gate_program_every_shot_realizes_target(rng):
    u = oracles.random_unitary(rng)
    prog = isa.Program(compiler.prelude_macros(),
                       (compiler.compile_gate(u, 0),))
    psi = oracles.random_state(rng, 2)
    init = StateVector.from_photons(psi, np.array([1, 0], dtype=complex))
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=5, shots=16)
    want = u @ psi
    for r in run_sampled(prog, cfg, initial=init):
        photons, _ = r.state.split_product()
        fid = abs(np.vdot(want, photons / np.linalg.norm(photons)))
        assert fid >= 1 - 1e-9


def test_run_branches_gate_program(rng):
    u = oracles.random_unitary(rng)
    prog = isa.Program(compiler.prelude_macros(),
                       (compiler.compile_gate(u, 0),))
    psi = oracles.random_state(rng, 2)
    init = StateVector.from_photons(psi, np.array([1, 0], dtype=complex))
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=5)
    bs = run_branches(prog, cfg, initial=init)
    assert len(bs) == 8
    assert bs.total_probability() == pytest.approx(1.0, abs=1e-12)
    want = u @ psi
    states = []
    for b in bs:
        assert b.probability == pytest.approx(1 / 8, abs=1e-12)
        photons, _ = b.state.split_product()
        photons /= np.linalg.norm(photons)
        states.append(photons)
        assert abs(np.vdot(want, photons)) >= 1 - 1e-9
    for s in states[1:]:
        assert abs(np.vdot(states[0], s)) >= 1 - 1e-9


def test_run_branches_no_meas():
    prog = parse_with_prelude("INIT |g1>\nSCTR q1\n")
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=0)
    bs = run_branches(prog, cfg)
    assert len(bs) == 1
    assert bs[0].probability == pytest.approx(1.0)
    assert bs[0].outcome == ""


def test_run_branches_meas_bound():
    body = "".join("INIT |+>\nMEAS m\n" for _ in range(25))
    prog = isa.parse(body)
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=0)
    with pytest.raises(ValueError, match="bounded"):
        run_branches(prog, cfg)


def test_run_branches_prunes_tiny_branches():
    prog = isa.parse("INIT |g0>\nROTY 1e-8\nMEAS m\n")
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=0)
    bs = run_branches(prog, cfg)
    assert len(bs) == 1
    assert bs.pruned_count == 1
    assert bs.pruned_mass < 1e-12


def test_sampled_matches_enumeration():
    prog = parse_with_prelude("GATE q1 0.3 1.1 2.2\n")
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=11, shots=10000)
    results = run_sampled(prog, cfg)
    counts = {}
    for r in results:
        counts[r.outcome] = counts.get(r.outcome, 0) + 1
    bs = run_branches(prog, cfg)
    for b in bs:
        n = counts.get(b.outcome, 0)
        p = b.probability
        sigma = np.sqrt(cfg.shots * p * (1 - p))
        assert abs(n - cfg.shots * p) <= 3 * sigma + 1


def test_register_feedforward_changes_angle():
    # measure the atom, rotate by m*pi: outcome 1 flips the atom again
    prog = isa.parse("INIT |g1>\nMEAS m\nROTY m*π\nMEAS n\n")
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=0)
    bs = run_branches(prog, cfg)
    assert len(bs) == 1
    assert bs[0].outcome == "10"   # m=1, then Ry(pi) maps |g1> -> |g0>


def test_verify_empty_program_identity():
    prog = isa.parse("")
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=0)
    assert verify_program(prog, np.eye(2), cfg) <= 1e-12


def test_verify_rejects_wrong_dimension():
    prog = isa.parse("")
    cfg = RunConfig(device=DeviceConfig(n_photons=2), seed=0)
    with pytest.raises(ValueError, match="shape"):
        verify_program(prog, np.eye(2), cfg)


def test_verify_detects_wrong_gate(rng):
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    prog = isa.Program(compiler.prelude_macros(),
                       (compiler.compile_gate(h, 0),))
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=0)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    worst = verify_program(prog, x, cfg)
    assert worst > 0.2


def test_verify_catches_relative_phase_error():
    # a diagonal phase gate is perfect on basis inputs but not on
    # superpositions; verifying against the identity must fail
    prog = isa.Program(compiler.prelude_macros(),
                       (compiler.compile_gate(oracles.rz(1.0), 0),))
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=0)
    worst = verify_program(prog, np.eye(2), cfg)
    assert worst > 0.05


def test_verify_strips_readout():
    spec = compiler.CircuitSpec(1, (
        compiler.SingleGate(0, oracles.rz(0.4)),
        compiler.MeasureAll(),
    ))
    prog = compiler.compile_circuit(spec)
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=0)
    assert verify_program(prog, oracles.rz(0.4), cfg) <= 1e-9


def test_survival_of():
    cfg0 = DeviceConfig(n_photons=1, loss_per_cycle=0.0)
    prog = parse_with_prelude("INIT |g0>\nSCTR q1\n")
    assert vm.survival_of(prog, cfg0) == 1.0
    cfg = DeviceConfig(n_photons=1, loss_per_cycle=1e-4)
    assert vm.survival_of(prog, cfg) == pytest.approx(1 - 1e-4)
    prog5 = parse_with_prelude("INIT |g0>\n" + "SCTR q1\n" * 5)
    assert vm.survival_of(prog5, cfg) == pytest.approx((1 - 1e-4) ** 5)


def test_survival_multiplicative_order_independent():
    cfg = DeviceConfig(n_photons=2, loss_per_cycle=1e-3)
    a = parse_with_prelude("INIT |g0>\nSCTR q1\nSCTR q2\n")
    b = parse_with_prelude("INIT |g0>\nSCTR q2\nSCTR q1\n")
    assert vm.survival_of(a, cfg) == vm.survival_of(b, cfg)


def test_runtime_survival_tracks_loss():
    prog = parse_with_prelude("INIT |g0>\nSCTR q1\nSCTR q1\n")
    cfg = RunConfig(device=DeviceConfig(n_photons=1, loss_per_cycle=0.01),
                    seed=0, shots=1, loss_enabled=True)
    results = run_sampled(prog, cfg)
    assert results[0].survival == pytest.approx(0.99 ** 2)


def test_timing_error_raised():
    prog = isa.parse("OPEN 0.5\nOPEN 1.5\nCLOS 2.5\n")
    cfg = RunConfig(device=DeviceConfig(n_photons=1), seed=0)
    with pytest.raises(vm.TimingError):
        run_sampled(prog, cfg)


def test_report_format():
    rows = [vm.BranchResult("01", 0.25, StateVector.ground(1), 1.0)]
    text = vm.render_run_report(3, 1, rows, None)
    assert text == ('{"branches":[{"outcome":"01","probability":0.25,'
                    '"survival":1}],"seed":3,"shots":1,'
                    '"worst_infidelity":null}\n')


def test_shot_config_validation():
    with pytest.raises(ValueError):
        RunConfig(device=DeviceConfig(n_photons=1), shots=0)

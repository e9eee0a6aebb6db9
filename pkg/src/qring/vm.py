"""Program execution with classical feedforward.

Three evaluation modes share one instruction engine:

* ``run_sampled``   -- seeded Monte-Carlo shots (counter-based RNG keyed by
  (seed, shot), so results are reproducible across thread schedules),
* ``run_branches``  -- exhaustive depth-first enumeration of every
  measurement outcome with exact projection probabilities,
* ``verify_program``-- the correctness oracle: enumerates outcomes while
  merging branches whose states agree up to a global phase (and whose
  still-live registers agree), which keeps the frontier small even for
  programs with hundreds of measurements.

Instruction semantics: ROTX θ applies Rx(-θ) to the atom (the operand is
the teleported angle; the laser drives the inverse rotation), ROTY θ
applies Ry(θ), INIT resets a disentangled atom, MEAS projects the atom and
stores the bit, and a completed scattering group applies one pass through
the scattering unit, consuming one ring cycle of heralded loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import device, isa, qstate
from .isa import DeviceConfig, Program, SdqError, XCond, XInstr, XNode
from .qstate import StateVector

MAX_EXACT_MEAS = 24
PRUNE_THRESHOLD = 1e-12
MERGE_TOL = 1e-7


class TimingError(RuntimeError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__(
            "switch-timing validation failed:\n  " + "\n  ".join(violations))


@dataclass(frozen=True)
class RunConfig:
    device: DeviceConfig
    seed: int = 0
    shots: int = 1
    mode: str = "sampled"  # 'sampled' | 'exhaustive'
    loss_enabled: bool = False

    def __post_init__(self):
        if self.mode == "sampled" and self.shots < 1:
            raise ValueError("sampled mode requires shots >= 1")


@dataclass(frozen=True)
class BranchResult:
    outcome: str          # MEAS bits in program order
    probability: float
    state: StateVector
    survival: float


@dataclass(frozen=True)
class BranchSet:
    """Exhaustive enumeration result with the pruning report."""

    branches: tuple[BranchResult, ...]
    pruned_count: int = 0
    pruned_mass: float = 0.0

    def __iter__(self):
        return iter(self.branches)

    def __len__(self):
        return len(self.branches)

    def __getitem__(self, i):
        return self.branches[i]

    def total_probability(self) -> float:
        return sum(b.probability for b in self.branches)


def _rng_for(seed: int, shot: int) -> np.random.Generator:
    # counter-based generator keyed by (seed, shot); the draw index advances
    # the counter, so streams are independent of thread scheduling
    return np.random.Generator(
        np.random.Philox(key=np.uint64(seed & (2 ** 64 - 1)),
                         counter=[0, 0, 0, shot]))


def _env_for(cfg: DeviceConfig, regs: dict[str, int]) -> dict[str, float]:
    env: dict[str, float] = {k: float(v) for k, v in regs.items()}
    env["Δt"] = cfg.dt
    env["N"] = float(cfg.n_bins)
    return env


def _cond_holds(nd: XCond, cfg: DeviceConfig, regs) -> bool:
    env = _env_for(cfg, regs)
    lhs = isa.eval_expr(nd.lhs, env)
    rhs = isa.eval_expr(nd.rhs, env)
    eq = abs(lhs - rhs) < 1e-9
    return eq if nd.op == "==" else not eq


def _prepare(p: Program, cfg: DeviceConfig):
    nodes = isa.expand(p, cfg)
    violations = isa.validate_timing(nodes, cfg)
    if violations:
        raise TimingError(violations)
    return nodes


def _count_meas(nodes) -> int:
    total = 0
    for nd in nodes:
        if isinstance(nd, XCond):
            total += _count_meas(nd.body)
        elif nd.opcode == "MEAS":
            total += 1
    return total


class _Shot:
    """Sequential executor for one sampled shot."""

    def __init__(self, cfg: RunConfig, state: StateVector,
                 rng: np.random.Generator):
        self.cfg = cfg
        self.state = state
        self.rng = rng
        self.regs: dict[str, int] = {}
        self.bits: list[int] = []
        self.prob = 1.0

    def run(self, nodes) -> None:
        for nd in nodes:
            if isinstance(nd, XCond):
                if _cond_holds(nd, self.cfg.device, self.regs):
                    self.run(nd.body)
                continue
            op = nd.opcode
            if op in ("OPEN", "CLOS"):
                continue
            if op == "SCTR":
                factor = 1.0
                if self.cfg.loss_enabled:
                    factor = 1.0 - self.cfg.device.loss_per_cycle
                self.state = device.scatter_pass(self.state, nd.bin, factor)
            elif op == "ROTX":
                theta = isa.eval_expr(nd.operand,
                                      _env_for(self.cfg.device, self.regs))
                self.state = qstate.apply_1q(
                    self.state, self.state.atom_index, qstate.rot_x(-theta))
            elif op == "ROTY":
                theta = isa.eval_expr(nd.operand,
                                      _env_for(self.cfg.device, self.regs))
                self.state = qstate.apply_1q(
                    self.state, self.state.atom_index, qstate.rot_y(theta))
            elif op == "INIT":
                self.state = device.init_atom(self.state, nd.operand.which)
            elif op == "MEAS":
                draw = float(self.rng.random())
                bit, self.state, prob = qstate.measure(
                    self.state, self.state.atom_index, draw)
                self.regs[nd.operand.ident] = bit
                self.bits.append(bit)
                self.prob *= prob
            else:
                raise SdqError(f"executor cannot handle {op}", nd.line)


def run_sampled(p: Program, cfg: RunConfig,
                initial: StateVector | None = None) -> list[BranchResult]:
    """Execute ``cfg.shots`` independent seeded shots."""
    nodes = _prepare(p, cfg.device)
    results = []
    for shot in range(cfg.shots):
        state = initial if initial is not None \
            else StateVector.ground(cfg.device.n_photons)
        ex = _Shot(cfg, state, _rng_for(cfg.seed, shot))
        ex.run(nodes)
        results.append(BranchResult(
            outcome="".join(map(str, ex.bits)),
            probability=ex.prob,
            state=ex.state,
            survival=ex.state.survival,
        ))
    return results


def run_branches(p: Program, cfg: RunConfig,
                 initial: StateVector | None = None) -> BranchSet:
    """Enumerate every measurement outcome with exact probabilities."""
    nodes = _prepare(p, cfg.device)
    n_meas = _count_meas(nodes)
    if n_meas > MAX_EXACT_MEAS:
        raise ValueError(
            f"program has {n_meas} measurements; exhaustive enumeration is "
            f"bounded to {MAX_EXACT_MEAS} (use verify_program instead)")
    state0 = initial if initial is not None \
        else StateVector.ground(cfg.device.n_photons)
    loss = (1.0 - cfg.device.loss_per_cycle) if cfg.loss_enabled else 1.0

    branches: list[BranchResult] = []
    pruned = [0, 0.0]

    def walk(work, state: StateVector, prob: float, bits: tuple,
             regs: dict[str, int]):
        work = list(work)
        while work:
            lst, idx = work.pop()
            if idx >= len(lst):
                continue
            work.append((lst, idx + 1))
            nd = lst[idx]
            if isinstance(nd, XCond):
                if _cond_holds(nd, cfg.device, regs):
                    work.append((nd.body, 0))
                continue
            op = nd.opcode
            if op in ("OPEN", "CLOS"):
                continue
            if op == "SCTR":
                state = device.scatter_pass(state, nd.bin, loss)
            elif op == "ROTX":
                theta = isa.eval_expr(nd.operand, _env_for(cfg.device, regs))
                state = qstate.apply_1q(state, state.atom_index,
                                        qstate.rot_x(-theta))
            elif op == "ROTY":
                theta = isa.eval_expr(nd.operand, _env_for(cfg.device, regs))
                state = qstate.apply_1q(state, state.atom_index,
                                        qstate.rot_y(theta))
            elif op == "INIT":
                state = device.init_atom(state, nd.operand.which)
            elif op == "MEAS":
                rem = list(work)
                for bit in (0, 1):
                    sub, pb = qstate.project(state, state.atom_index, bit)
                    if sub is None or prob * pb < PRUNE_THRESHOLD:
                        if sub is not None or pb > 0:
                            pruned[0] += 1
                            pruned[1] += prob * pb
                        continue
                    regs2 = dict(regs)
                    regs2[nd.operand.ident] = bit
                    walk(rem, sub, prob * pb, bits + (bit,), regs2)
                return
            else:
                raise SdqError(f"executor cannot handle {op}", nd.line)
        branches.append(BranchResult(
            outcome="".join(map(str, bits)),
            probability=prob,
            state=state,
            survival=state.survival,
        ))

    walk([(nodes, 0)], state0, 1.0, (), {})
    branches.sort(key=lambda b: b.outcome)
    return BranchSet(tuple(branches), pruned[0], pruned[1])


# ---------------------------------------------------------------------------
# merged enumeration (the verification oracle)
# ---------------------------------------------------------------------------

def _node_reads(nd: XNode) -> set[str]:
    if isinstance(nd, XCond):
        reads = isa.expr_registers(nd.lhs) | isa.expr_registers(nd.rhs)
        for sub in nd.body:
            reads |= _node_reads(sub)
        return reads
    if nd.opcode in ("ROTX", "ROTY"):
        return isa.expr_registers(nd.operand)
    return set()


def _cond_has_meas(nd: XNode) -> bool:
    if isinstance(nd, XCond):
        return any(_cond_has_meas(s) for s in nd.body)
    return nd.opcode == "MEAS"


def _run_segment(nodes, state: StateVector, regs, cfg: DeviceConfig):
    """Execute measurement-free nodes (conditionals allowed)."""
    for nd in nodes:
        if isinstance(nd, XCond):
            if _cond_holds(nd, cfg, regs):
                state = _run_segment(nd.body, state, regs, cfg)
            continue
        op = nd.opcode
        if op in ("OPEN", "CLOS"):
            continue
        if op == "SCTR":
            state = device.scatter_pass(state, nd.bin)
        elif op == "ROTX":
            theta = isa.eval_expr(nd.operand, _env_for(cfg, regs))
            state = qstate.apply_1q(state, state.atom_index,
                                    qstate.rot_x(-theta))
        elif op == "ROTY":
            theta = isa.eval_expr(nd.operand, _env_for(cfg, regs))
            state = qstate.apply_1q(state, state.atom_index,
                                    qstate.rot_y(theta))
        elif op == "INIT":
            state = device.init_atom(state, nd.operand.which)
        else:
            raise SdqError(f"segment executor cannot handle {op}", nd.line)
    return state


def _dfs_nodes(nodes, state: StateVector, prob: float, regs: dict,
               cfg: DeviceConfig):
    """Exact enumeration of a node list; yields (state, prob, regs) leaves."""
    leaves = []

    def walk(work, state, prob, regs):
        work = list(work)
        while work:
            lst, idx = work.pop()
            if idx >= len(lst):
                continue
            work.append((lst, idx + 1))
            nd = lst[idx]
            if isinstance(nd, XCond):
                if _cond_holds(nd, cfg, regs):
                    work.append((nd.body, 0))
                continue
            if nd.opcode == "MEAS":
                rem = list(work)
                st2 = state
                for bit in (0, 1):
                    sub, pb = qstate.project(st2, st2.atom_index, bit)
                    if sub is None or prob * pb < PRUNE_THRESHOLD:
                        continue
                    regs2 = dict(regs)
                    regs2[nd.operand.ident] = bit
                    walk(rem, sub, prob * pb, regs2)
                return
            state = _run_segment([nd], state, regs, cfg)
        leaves.append((state, prob, regs))

    walk([(nodes, 0)], state, prob, regs)
    return leaves


def enumerate_merged(nodes: list[XNode], state0: StateVector,
                     cfg: DeviceConfig, merge_tol: float = MERGE_TOL,
                     max_width: int = 8192):
    """Enumerate outcomes, merging branches equal up to a global phase.

    Branches are merged after every measurement when their states agree up
    to a global phase and their still-live register values agree, so
    branch-deterministic programs keep a small frontier no matter how many
    measurements they contain.  Conditionals containing measurements are
    enumerated exactly per frontier element.  Returns (elements,
    max_frontier_width); elements are dicts with 'state', 'prob',
    'outcomes' (raw outcome count merged in).
    """
    last_read: dict[str, int] = {}
    for i, nd in enumerate(nodes):
        for r in _node_reads(nd):
            last_read[r] = i

    frontier = [{"state": state0, "prob": 1.0, "regs": {}, "outcomes": 1}]
    width = 1

    def merge_at(split, pos):
        buckets: dict[tuple, list] = {}
        count = 0
        for el in split:
            live = tuple(sorted(
                (r, v) for r, v in el["regs"].items()
                if last_read.get(r, -1) > pos))
            el["live"] = live
            el["regs"] = dict(live)
            rows = buckets.setdefault(live, [])
            for row in rows:
                if qstate.fidelity_up_to_phase(
                        row["state"], el["state"]) > 1 - merge_tol:
                    row["prob"] += el["prob"]
                    row["outcomes"] += el["outcomes"]
                    break
            else:
                rows.append(el)
                count += 1
                if count > max_width:
                    raise RuntimeError(
                        f"merged frontier exceeded {max_width} elements; "
                        "program is strongly branch-dependent")
        return [el for rows in buckets.values() for el in rows]

    for i, nd in enumerate(nodes):
        if isinstance(nd, XInstr) and nd.opcode == "MEAS":
            reg = nd.operand.ident
            split = []
            for el in frontier:
                for bit in (0, 1):
                    sub, pb = qstate.project(el["state"],
                                             el["state"].atom_index, bit)
                    if sub is None or el["prob"] * pb < PRUNE_THRESHOLD:
                        continue
                    regs2 = dict(el["regs"])
                    regs2[reg] = bit
                    split.append({"state": sub, "prob": el["prob"] * pb,
                                  "regs": regs2,
                                  "outcomes": el["outcomes"]})
            frontier = merge_at(split, i)
        elif isinstance(nd, XCond) and _cond_has_meas(nd):
            split = []
            for el in frontier:
                if not _cond_holds(nd, cfg, el["regs"]):
                    split.append(el)
                    continue
                for st, pr, regs in _dfs_nodes(list(nd.body), el["state"],
                                               el["prob"], el["regs"], cfg):
                    split.append({"state": st, "prob": pr, "regs": regs,
                                  "outcomes": el["outcomes"]})
            frontier = merge_at(split, i)
        else:
            for el in frontier:
                el["state"] = _run_segment([nd], el["state"], el["regs"],
                                           cfg)
        width = max(width, len(frontier))
    return frontier, width


def _strip_readout(p: Program) -> Program:
    """Drop the trailing readout block (LOAD calls / MEAS / comments)."""
    body = list(p.body)
    while body:
        s = body[-1]
        if isinstance(s, isa.Comment):
            body.pop()
        elif isinstance(s, isa.Instr) and s.opcode == "MEAS":
            body.pop()
        elif isinstance(s, isa.Call) and s.name == "LOAD":
            body.pop()
        else:
            break
    return Program(macros=p.macros, body=tuple(body))


def verify_program(p: Program, target: np.ndarray, cfg: RunConfig,
                   n_random_inputs: int = 2) -> float:
    """Worst-case infidelity of the program against an n-photon unitary.

    Runs branch enumeration for every computational-basis input plus
    ``n_random_inputs`` random superposition inputs and returns the max of
    1 - |<target psi | final photonic state>| over inputs and branches.
    One global phase per branch is allowed; relative phases across inputs
    are caught by the superposition inputs.  A trailing readout block is
    stripped before verification.
    """
    n = cfg.device.n_photons
    dim = 2 ** n
    target = np.asarray(target, dtype=complex)
    if target.shape != (dim, dim):
        raise ValueError(
            f"target has shape {target.shape}, expected {(dim, dim)}")
    stripped = _strip_readout(p)
    nodes = _prepare(stripped, cfg.device)

    rng = _rng_for(cfg.seed, 0xFEED)
    inputs = [np.eye(dim, dtype=complex)[k] for k in range(dim)]
    for _ in range(n_random_inputs):
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        inputs.append(v / np.linalg.norm(v))

    worst = 0.0
    for vec in inputs:
        state0 = StateVector.from_photons(vec, device.ATOM_STATES["g0"])
        frontier, _w = enumerate_merged(nodes, state0, cfg.device)
        total = sum(el["prob"] for el in frontier)
        worst = max(worst, abs(1.0 - total))
        want = target @ vec
        for el in frontier:
            try:
                photons, _atom = el["state"].split_product()
            except ValueError:
                worst = max(worst, 1.0)
                continue
            photons = photons / np.linalg.norm(photons)
            fid = abs(np.vdot(want, photons))
            worst = max(worst, 1.0 - fid)
    return worst


def survival_of(p: Program, cfg: DeviceConfig) -> float:
    """(1 - L)^cycles for the expanded schedule's ring-cycle count."""
    nodes = isa.expand(p, cfg)
    cycles = isa.count_cycles(nodes)
    return (1.0 - cfg.loss_per_cycle) ** cycles


# ---------------------------------------------------------------------------
# run reports
# ---------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    return f"{x:.12g}"


def render_run_report(seed: int, shots: int, results,
                      worst_infidelity: float | None = None) -> str:
    """Canonical JSON-shaped report: sorted keys, stable float formatting."""
    rows = []
    for r in results:
        rows.append(
            '{"outcome":"%s","probability":%s,"survival":%s}'
            % (r.outcome, _fmt_float(r.probability), _fmt_float(r.survival)))
    wi = "null" if worst_infidelity is None else _fmt_float(worst_infidelity)
    return ('{"branches":[%s],"seed":%d,"shots":%d,"worst_infidelity":%s}\n'
            % (",".join(rows), seed, shots, wi))

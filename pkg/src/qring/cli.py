"""Command-line front end: compile, run, verify, transport-sweep, depth-map.

Exit codes: 0 success, 1 verification failure, 2 input error.  All
subcommands are deterministic given their flags; the default seed comes
from the QRING_SEED environment variable when --seed is absent.  Output
files are written atomically (write-then-rename), and the sweep/depth
subcommands render a matplotlib figure next to each CSV.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import tempfile

import numpy as np

from . import compiler, isa, transport, vm

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INPUT_ERROR = 2

SEED_ENV_VAR = "QRING_SEED"


def _default_seed() -> int:
    try:
        return int(os.environ.get(SEED_ENV_VAR, "0"))
    except ValueError:
        return 0


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".qring-tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def infer_n_photons(p: isa.Program) -> int:
    """Photon count from the largest qN token in the program body."""
    best = 0

    def scan_expr(e):
        nonlocal best
        if isinstance(e, isa.Name):
            m = re.fullmatch(r"q(\d+)", e.ident)
            if m:
                best = max(best, int(m.group(1)))
        elif isinstance(e, isa.Neg):
            scan_expr(e.arg)
        elif isinstance(e, isa.BinOp):
            scan_expr(e.lhs)
            scan_expr(e.rhs)

    def scan(stmts):
        for s in stmts:
            if isinstance(s, isa.Call):
                for a in s.args:
                    scan_expr(a)
            elif isinstance(s, isa.If):
                scan(s.body)

    scan(p.body)
    return best


def load_unitary(path: str) -> np.ndarray:
    """Read a row-major complex-pair unitary file."""
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0]
            vals.extend(float(x) for x in line.split())
    n = len(vals) // 2
    dim = int(round(np.sqrt(n)))
    if dim * dim * 2 != len(vals):
        raise ValueError(
            f"{path}: expected 2*d^2 reals for a d x d unitary, "
            f"got {len(vals)} values")
    z = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return z.reshape(dim, dim)


def save_unitary(path: str, u: np.ndarray) -> None:
    lines = []
    for row in np.asarray(u, dtype=complex):
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    _atomic_write(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_compile(args) -> int:
    try:
        with open(args.circuit) as fh:
            spec = compiler.parse_circuit(fh.read())
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except compiler.CircuitError as e:
        print(f"error: {args.circuit}: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    mode = ("explicit_corrections" if args.mode == "explicit"
            else "folded")
    program = compiler.compile_circuit(spec, mode=mode, cz_strategy=args.cz)
    _atomic_write(args.out, isa.pretty(program))
    return EXIT_OK


def cmd_run(args) -> int:
    if args.shots < 1:
        print("error: --shots must be >= 1", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        with open(args.program) as fh:
            program = isa.parse(fh.read())
    except (OSError, isa.SdqError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    n = args.photons or infer_n_photons(program)
    if n < 1:
        print("error: cannot infer photon count; pass --photons",
              file=sys.stderr)
        return EXIT_INPUT_ERROR
    device_cfg = isa.DeviceConfig(n_photons=n, n_bins=args.bins or None,
                                  loss_per_cycle=args.loss)
    cfg = vm.RunConfig(device=device_cfg, seed=args.seed, shots=args.shots,
                       loss_enabled=args.loss > 0)
    try:
        results = vm.run_sampled(program, cfg)
    except vm.TimingError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except isa.SdqError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    report = vm.render_run_report(args.seed, args.shots, results)
    if args.report:
        _atomic_write(args.report, report)
    else:
        sys.stdout.write(report)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        with open(args.program) as fh:
            program = isa.parse(fh.read())
        target = load_unitary(args.target)
    except (OSError, isa.SdqError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    n = args.photons or infer_n_photons(program)
    if 2 ** n != target.shape[0]:
        print(f"error: target dimension {target.shape[0]} does not match "
              f"{n} photons", file=sys.stderr)
        return EXIT_INPUT_ERROR
    device_cfg = isa.DeviceConfig(n_photons=n)
    cfg = vm.RunConfig(device=device_cfg, seed=args.seed)
    try:
        worst = vm.verify_program(program, target, cfg)
    except (vm.TimingError, isa.SdqError, ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    print(f"{worst:.12g}")
    return EXIT_OK if worst <= args.tol else EXIT_VERIFY_FAIL


def _maybe_plot_sweep(rows, png_path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    c = [r["C"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.loglog(c, [max(r["infid_g0"], 1e-12) for r in rows], label="g0")
    ax.loglog(c, [max(r["infid_g1"], 1e-12) for r in rows], label="g1")
    ax.loglog(c, [max(r["infid_plus"], 1e-12) for r in rows], label="|+>")
    ax.loglog(c, [max(r["infid_corrected"], 1e-12) for r in rows],
              label="delay corrected")
    ax.loglog(c, [max(r["avg_leakage"], 1e-15) for r in rows],
              label="avg leakage", linestyle="--")
    ax.set_xlabel("cooperativity C")
    ax.set_ylabel("shape infidelity / leakage")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def cmd_transport_sweep(args) -> int:
    if args.cmin < 1:
        print("error: --cmin must be >= 1", file=sys.stderr)
        return EXIT_INPUT_ERROR
    grid = transport.PulseGrid(T=args.window, M=args.samples, tau=args.tau)
    cs = np.logspace(np.log10(args.cmin), np.log10(args.cmax), args.points)
    try:
        rows = transport.sweep_cooperativity(cs, grid,
                                             gamma_ratio=args.gamma_ratio)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    _atomic_write(args.out, transport.sweep_csv(rows))
    if not args.no_plot:
        _maybe_plot_sweep(rows, os.path.splitext(args.out)[0] + ".png")
    return EXIT_OK


def _maybe_plot_depth(rows, c_values, l_values, png_path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    d = np.array([r["D"] for r in rows], dtype=float)
    d = d.reshape(len(c_values), len(l_values))
    fig, ax = plt.subplots(figsize=(6, 4.2))
    mesh = ax.pcolormesh(l_values, c_values, np.log10(np.maximum(d, 1)),
                         shading="auto")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("loss per cycle L")
    ax.set_ylabel("cooperativity C")
    fig.colorbar(mesh, ax=ax, label="log10 achievable depth")
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def cmd_depth_map(args) -> int:
    if args.cmin < 1:
        print("error: --cmin must be >= 1", file=sys.stderr)
        return EXIT_INPUT_ERROR
    grid = transport.PulseGrid(T=args.window, M=args.samples, tau=args.tau)
    cs = np.logspace(np.log10(args.cmin), np.log10(args.cmax), args.cpoints)
    ls = np.logspace(np.log10(args.lmin), np.log10(args.lmax), args.lpoints)
    try:
        rows = transport.depth_map(cs, ls, args.target_fidelity, grid,
                                   gamma_ratio=args.gamma_ratio)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    _atomic_write(args.out, transport.depth_csv(rows))
    if not args.no_plot:
        _maybe_plot_depth(rows, cs, ls, os.path.splitext(args.out)[0] + ".png")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qring",
        description="Compile and simulate programs for the single-atom "
                    "time-multiplexed photonic processor.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a circuit file to .sdq")
    p.add_argument("--circuit", required=True)
    p.add_argument("--mode", choices=("explicit", "folded"),
                   default="explicit")
    p.add_argument("--cz", choices=("measured", "via_swap"),
                   default="measured")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", help="execute a program with seeded sampling")
    p.add_argument("--program", required=True)
    p.add_argument("--shots", type=int, default=1)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--loss", type=float, default=0.0)
    p.add_argument("--report", default=None)
    p.add_argument("--photons", type=int, default=None)
    p.add_argument("--bins", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="worst-case infidelity vs a unitary")
    p.add_argument("--program", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--photons", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("transport-sweep",
                       help="cooperativity sweep of shape infidelity/leakage")
    p.add_argument("--cmin", type=float, default=1.0)
    p.add_argument("--cmax", type=float, default=1e5)
    p.add_argument("--points", type=int, default=30)
    p.add_argument("--tau", type=float, default=100.0)
    p.add_argument("--window", type=float, default=500.0)
    p.add_argument("--samples", type=int, default=4096)
    p.add_argument("--gamma-ratio", type=float, default=0.2)
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_transport_sweep)

    p = sub.add_parser("depth-map",
                       help="achievable circuit depth over (C, L)")
    p.add_argument("--target-fidelity", type=float, default=0.5)
    p.add_argument("--cmin", type=float, default=1e2)
    p.add_argument("--cmax", type=float, default=1e5)
    p.add_argument("--cpoints", type=int, default=12)
    p.add_argument("--lmin", type=float, default=1e-6)
    p.add_argument("--lmax", type=float, default=1e-2)
    p.add_argument("--lpoints", type=int, default=12)
    p.add_argument("--tau", type=float, default=100.0)
    p.add_argument("--window", type=float, default=500.0)
    p.add_argument("--samples", type=int, default=4096)
    p.add_argument("--gamma-ratio", type=float, default=0.2)
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_depth_map)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

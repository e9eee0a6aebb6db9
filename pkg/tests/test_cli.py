import numpy as np
import pytest

from qring import cli, isa
from qring.cli import main


def run_cli(args):
    return main(args)


def test_compile_bundled_circuit(tmp_path, data_dir):
    out = tmp_path / "qft3.sdq"
    code = run_cli(["compile", "--circuit", str(data_dir / "qft3.circuit"),
                    "--out", str(out)])
    assert code == 0
    prog = isa.parse(out.read_text())
    assert set(prog.macros) == {"SCTR", "CORR", "GATE", "LOAD", "CTRZ"}
    calls = [s for s in prog.body if isinstance(s, isa.Call)]
    assert any(c.name == "CTRZ" for c in calls)


def test_compile_empty_circuit(tmp_path):
    src = tmp_path / "empty.circuit"
    src.write_text("# nothing here\n")
    out = tmp_path / "empty.sdq"
    assert run_cli(["compile", "--circuit", str(src),
                    "--out", str(out)]) == 0
    prog = isa.parse(out.read_text())
    assert prog.body == ()


def test_compile_malformed_circuit(tmp_path, capsys):
    src = tmp_path / "bad.circuit"
    src.write_text("single 0 1 2\n")
    out = tmp_path / "bad.sdq"
    assert run_cli(["compile", "--circuit", str(src),
                    "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "line 1" in err


def test_run_reports_are_byte_identical(tmp_path, data_dir):
    prog = data_dir / "qft3.sdq"
    r1 = tmp_path / "a.json"
    r2 = tmp_path / "b.json"
    for r in (r1, r2):
        code = run_cli(["run", "--program", str(prog), "--shots", "3",
                        "--seed", "9", "--report", str(r)])
        assert code == 0
    assert r1.read_bytes() == r2.read_bytes()


def test_run_rejects_zero_shots(tmp_path, data_dir, capsys):
    code = run_cli(["run", "--program", str(data_dir / "qft3.sdq"),
                    "--shots", "0"])
    assert code == 2


def test_verify_bundled_qft3(data_dir, capsys):
    code = run_cli(["verify", "--program", str(data_dir / "qft3.sdq"),
                    "--target", str(data_dir / "qft3.mat"),
                    "--tol", "1e-3"])
    out = capsys.readouterr().out
    assert code == 0
    assert float(out.strip()) <= 1e-3


def test_verify_identity_program(tmp_path, capsys):
    prog = tmp_path / "id.sdq"
    prog.write_text("# no operations\n")
    target = tmp_path / "id.mat"
    cli.save_unitary(str(target), np.eye(2, dtype=complex))
    code = run_cli(["verify", "--program", str(prog), "--photons", "1",
                    "--target", str(target)])
    out = capsys.readouterr().out
    assert code == 0
    assert float(out.strip()) <= 1e-12


def test_verify_wrong_target_fails(tmp_path, data_dir, capsys):
    from qring import compiler
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    spec = compiler.CircuitSpec(1, (compiler.SingleGate(0, h),))
    prog_text = isa.pretty(compiler.compile_circuit(spec))
    prog = tmp_path / "h.sdq"
    prog.write_text(prog_text)
    target = tmp_path / "x.mat"
    cli.save_unitary(str(target),
                     np.array([[0, 1], [1, 0]], dtype=complex))
    code = run_cli(["verify", "--program", str(prog),
                    "--target", str(target)])
    out = capsys.readouterr().out
    assert code == 1
    assert float(out.strip()) > 0.2


def test_verify_dimension_mismatch(tmp_path, data_dir, capsys):
    target = tmp_path / "wrong.mat"
    cli.save_unitary(str(target), np.eye(2, dtype=complex))
    code = run_cli(["verify", "--program", str(data_dir / "qft3.sdq"),
                    "--target", str(target)])
    assert code == 2


def test_transport_sweep_single_point(tmp_path):
    out = tmp_path / "sweep.csv"
    code = run_cli(["transport-sweep", "--cmin", "100", "--cmax", "100",
                    "--points", "1", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 2
    assert lines[0] == "C,infid_g0,infid_g1,infid_plus,infid_corrected," \
                       "avg_leakage"
    assert (tmp_path / "sweep.png").exists()


def test_transport_sweep_rejects_cmin(tmp_path, capsys):
    code = run_cli(["transport-sweep", "--cmin", "0.1",
                    "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_depth_map_cell(tmp_path):
    out = tmp_path / "depth.csv"
    code = run_cli(["depth-map", "--cmin", "10000", "--cmax", "10000",
                    "--cpoints", "1", "--lmin", "1e-4", "--lmax", "1e-4",
                    "--lpoints", "1", "--no-plot", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "C,L,D,bulk_fidelity"
    d = int(lines[1].split(",")[2])
    assert 1600 <= d <= 2400


def test_seed_env_var(tmp_path, data_dir, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV_VAR, "123")
    parser = cli.build_parser()
    # reparse defaults pick up the env var at parser build time
    args = cli.build_parser().parse_args(
        ["run", "--program", "x", "--shots", "1"])
    assert args.seed == 123
    args = cli.build_parser().parse_args(
        ["run", "--program", "x", "--shots", "1", "--seed", "7"])
    assert args.seed == 7


def test_infer_n_photons(data_dir):
    prog = isa.parse((data_dir / "qft3.sdq").read_text())
    assert cli.infer_n_photons(prog) == 3


def test_unitary_io_roundtrip(tmp_path, rng):
    u = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    path = tmp_path / "u.mat"
    cli.save_unitary(str(path), u)
    back = cli.load_unitary(str(path))
    assert np.allclose(u, back, atol=1e-15)
    path.write_text("1 2 3\n")
    with pytest.raises(ValueError):
        cli.load_unitary(str(path))

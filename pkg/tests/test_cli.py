"""End-to-end command checks: exit codes, artifacts, determinism."""

import numpy as np
import pytest
from click.testing import CliRunner

from stokeslab import perforated as pf
from stokeslab import report
from stokeslab.cli import main
from stokeslab.config import CONFIG_SCHEMA_VERSION, load_config
from stokeslab.fields import quadrature_points, quadrature_weights
from stokeslab.mesh import load_mesh


@pytest.fixture
def runner():
    return CliRunner()


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


SINGLE_HOLE = """\
[experiment]
kind = mesh
[domain]
l = 2.0
epsilon = 0.5
[discretization]
h_far = 0.5
n_hole = 16
"""

PERFORATED = """\
[experiment]
kind = restrict
[perforation]
side = 1.0
n = 2
[discretization]
n_hole = 16
"""


def sweep_config(tmp_path, extra=""):
    return write(
        tmp_path,
        "sweep.ini",
        "[experiment]\nkind = sweep\nsweep = uniform\n"
        "[discretization]\nh_far = 0.5\nn_hole = 16\n"
        "[sweep]\nepsilons = 0.5 0.25\n"
        f"[output]\ncsv = {tmp_path}/out.csv\njson = {tmp_path}/out.json\n"
        f"svg = {tmp_path}/out.svg\n" + extra,
    )


def test_version_reports_schema(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert f"config-schema {CONFIG_SCHEMA_VERSION}" in result.output


def test_invalid_config_exits_2(runner, tmp_path):
    config = write(tmp_path, "bad.ini", "[experiment]\nkind = warp\n")
    result = runner.invoke(main, ["mesh", "--config", config, "--out", "m.txt"])
    assert result.exit_code == 2
    assert "error:" in result.output


def test_sweep_rejects_other_kinds(runner, tmp_path):
    config = write(tmp_path, "mesh.ini", SINGLE_HOLE)
    result = runner.invoke(main, ["sweep", "--config", config])
    assert result.exit_code == 2
    assert "kind must be 'sweep'" in result.output


def test_mesh_and_solve_roundtrip(runner, tmp_path):
    config = write(tmp_path, "exp.ini", SINGLE_HOLE)
    mesh_path = str(tmp_path / "m.txt")
    result = runner.invoke(main, ["mesh", "--config", config, "--out", mesh_path])
    assert result.exit_code == 0, result.output
    m = load_mesh(mesh_path)
    assert m.nt > 0
    sol_path = str(tmp_path / "sol.txt")
    result = runner.invoke(
        main,
        ["solve", "--config", config, "--mesh", mesh_path, "--out", sol_path],
    )
    assert result.exit_code == 0, result.output
    header = open(sol_path).readline()
    assert header.startswith("stokes v1")


def test_uniform_sweep_artifacts(runner, tmp_path):
    config = sweep_config(tmp_path)
    result = runner.invoke(main, ["sweep", "--config", config])
    assert result.exit_code == 0, result.output
    assert "Theorem 1.3: pass" in result.output
    csv = (tmp_path / "out.csv").read_text().splitlines()
    assert csv[0] == ",".join(report.CSV_COLUMNS)
    assert len(csv) == 3
    assert '"claim": "Theorem 1.3"' in (tmp_path / "out.json").read_text()
    assert (tmp_path / "out.svg").stat().st_size > 0


def test_sweep_rerun_byte_identical(runner, tmp_path):
    config = sweep_config(tmp_path)
    assert runner.invoke(main, ["sweep", "--config", config]).exit_code == 0
    first = {
        name: (tmp_path / name).read_bytes()
        for name in ("out.csv", "out.json", "out.svg")
    }
    assert runner.invoke(main, ["sweep", "--config", config]).exit_code == 0
    for name, data in first.items():
        assert (tmp_path / name).read_bytes() == data, name


def test_restrict_verify_extension(runner, tmp_path):
    config = write(tmp_path, "res.ini", PERFORATED)
    result = runner.invoke(
        main, ["restrict", "--config", config, "--verify", "extension"]
    )
    assert result.exit_code == 0, result.output
    assert "Theorem 2.1: pass" in result.output


def test_failing_verdict_exits_1(runner, tmp_path):
    config = write(
        tmp_path, "res.ini", PERFORATED + "[thresholds]\nresidual = 1e-30\n"
    )
    result = runner.invoke(
        main, ["restrict", "--config", config, "--verify", "extension"]
    )
    assert result.exit_code == 1
    assert "Theorem 2.1: fail" in result.output


def test_restrict_requires_field_and_out(runner, tmp_path):
    config = write(tmp_path, "res.ini", PERFORATED)
    result = runner.invoke(main, ["restrict", "--config", config])
    assert result.exit_code == 2
    assert "--field and --out" in result.output


def test_restrict_apply(runner, tmp_path):
    config = write(tmp_path, "res.ini", PERFORATED)
    cfg = load_config(config)
    ms = pf.build_mesh_set(cfg.perforated_domain(), n_hole=16)
    coords = ms.full.p2_coords()
    u = np.column_stack([np.sin(coords[:, 0]), coords[:, 1] ** 2])
    field_path = str(tmp_path / "u.txt")
    report.save_field(u, ms.full, field_path)
    out_path = str(tmp_path / "ru.txt")
    result = runner.invoke(
        main,
        ["restrict", "--config", config, "--field", field_path,
         "--out", out_path],
    )
    assert result.exit_code == 0, result.output
    ru = report.load_field(out_path, ms.fluid)
    assert np.array_equal(ru, pf.restrict(ms, u))


def test_bogovskii_command(runner, tmp_path):
    config = write(tmp_path, "bog.ini", PERFORATED)
    cfg = load_config(config)
    ms = pf.build_mesh_set(cfg.perforated_domain(), n_hole=16, refine=True)
    qp = quadrature_points(ms.fluid, pf.WORK_DEGREE)
    W = quadrature_weights(ms.fluid, pf.WORK_DEGREE)
    vals = np.sin(2 * np.pi * qp[..., 0]) + 0.3 * qp[..., 1]
    vals -= np.sum(W * vals) / np.sum(W)
    from stokeslab.fields import TableField

    rhs_path = str(tmp_path / "f.txt")
    report.save_scalar_table(
        TableField(ms.fluid, pf.WORK_DEGREE, vals), rhs_path
    )
    out_path = str(tmp_path / "v.txt")
    result = runner.invoke(
        main,
        ["bogovskii", "--config", config, "--rhs", rhs_path,
         "--out", out_path, "--verify"],
    )
    assert result.exit_code == 0, result.output
    assert "Corollary 2.3: pass" in result.output
    v = report.load_field(out_path, ms.fluid)
    assert np.isfinite(v).all() and np.max(np.abs(v)) > 0.0

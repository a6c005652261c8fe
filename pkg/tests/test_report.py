"""Artifact writers: frozen CSV schema, verdict invariants, exchange files."""

from types import SimpleNamespace

import numpy as np
import pytest

from stokeslab import report
from stokeslab.errors import ConfigError, FieldEvalError
from stokeslab.fields import TableField
from stokeslab.mesh import structured_square_mesh
from stokeslab.quadrature import triangle_rule


@pytest.fixture(scope="module")
def mesh():
    return structured_square_mesh(0.0, 1.0, 4)


def record(**overrides):
    base = dict(
        epsilon=0.5, p=2.0, grad_lp=1.25, pressure_lp=0.5,
        source_lp=2.0, ratio=0.625, dofs=1234, seconds=0.75,
    )
    base.update(overrides)
    return SimpleNamespace(**base)


# -- CSV -----------------------------------------------------------------


def test_csv_columns_frozen():
    assert report.CSV_COLUMNS == (
        "epsilon", "p", "grad_lp", "pressure_lp",
        "source_lp", "ratio", "dofs", "seconds",
    )


def test_records_to_csv_layout():
    text = report.records_to_csv([record()])
    lines = text.splitlines()
    assert lines[0] == ",".join(report.CSV_COLUMNS)
    assert lines[1] == "0.5,2.0,1.25,0.5,2.0,0.625,1234,0.75"
    assert text.endswith("\n")


def test_csv_float_repr_roundtrips():
    value = 1.0 / 3.0
    text = report.records_to_csv([record(ratio=value)])
    cell = text.splitlines()[1].split(",")[5]
    assert float(cell) == value


def test_write_csv_deterministic(tmp_path):
    records = [record(), record(epsilon=0.25, ratio=0.7)]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    report.write_csv(records, a)
    report.write_csv(records, b)
    assert a.read_bytes() == b.read_bytes()


# -- verdicts ------------------------------------------------------------


def test_verdict_requires_claim():
    with pytest.raises(ConfigError):
        report.Verdict("", "pass", {}, {"band": 1.2})


def test_verdict_rejects_unknown_status():
    with pytest.raises(ConfigError):
        report.Verdict("bound", "maybe", {}, {"band": 1.2})


def test_pass_fail_require_thresholds():
    for status in ("pass", "fail"):
        with pytest.raises(ConfigError):
            report.Verdict("bound", status)
    # informational statuses are allowed without thresholds
    report.Verdict("bound", "inconclusive")
    report.Verdict("bound", "extrapolated")


def test_write_verdicts_sorted_and_deterministic(tmp_path):
    verdicts = [
        report.Verdict(
            "bound", "pass",
            {"zeta": 1.0, "alpha": np.float64(2.0), "n": np.int64(3)},
            {"band": 1.2},
        )
    ]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    report.write_verdicts(verdicts, a)
    report.write_verdicts(verdicts, b)
    payload = a.read_text()
    assert a.read_bytes() == b.read_bytes()
    assert payload.index('"alpha"') < payload.index('"zeta"')
    assert '"status": "pass"' in payload


# -- velocity field exchange ---------------------------------------------


def test_field_roundtrip(tmp_path):
    mesh = structured_square_mesh(0.0, 1.0, 4)
    rng = np.random.default_rng(11)
    coeffs = rng.standard_normal((mesh.n_p2, 2))
    path = tmp_path / "u.txt"
    report.save_field(coeffs, mesh, path)
    assert path.read_text().startswith(f"field v1 {mesh.n_p2} ")
    loaded = report.load_field(path, mesh)
    assert np.array_equal(loaded, coeffs)


def test_field_shape_rejected(mesh, tmp_path):
    with pytest.raises(FieldEvalError):
        report.save_field(np.zeros((3, 2)), mesh, tmp_path / "u.txt")


def test_field_wrong_mesh_rejected(mesh, tmp_path):
    path = tmp_path / "u.txt"
    report.save_field(np.zeros((mesh.n_p2, 2)), mesh, path)
    other = structured_square_mesh(0.0, 2.0, 4)
    with pytest.raises(FieldEvalError, match="different mesh"):
        report.load_field(path, other)


def test_field_bad_header_rejected(mesh, tmp_path):
    path = tmp_path / "u.txt"
    path.write_text("something else entirely\n")
    with pytest.raises(FieldEvalError, match="not a field v1 file"):
        report.load_field(path, mesh)


# -- scalar table exchange -----------------------------------------------


def test_scalar_table_roundtrip(mesh, tmp_path):
    degree = 4
    nq = len(triangle_rule(degree)[0])
    rng = np.random.default_rng(3)
    table = TableField(mesh, degree, rng.standard_normal((mesh.nt, nq)))
    path = tmp_path / "f.txt"
    report.save_scalar_table(table, path)
    loaded = report.load_scalar_table(path, mesh)
    assert loaded.degree == degree
    assert np.array_equal(loaded.values, table.values)


def test_scalar_table_wrong_mesh_rejected(mesh, tmp_path):
    nq = len(triangle_rule(4)[0])
    table = TableField(mesh, 4, np.zeros((mesh.nt, nq)))
    path = tmp_path / "f.txt"
    report.save_scalar_table(table, path)
    other = structured_square_mesh(0.0, 2.0, 4)
    with pytest.raises(FieldEvalError, match="different mesh"):
        report.load_scalar_table(path, other)


# -- plots ---------------------------------------------------------------


def test_loglog_svg_deterministic(tmp_path):
    records = [
        record(epsilon=e, ratio=r)
        for e, r in ((0.5, 0.6), (0.25, 0.62), (0.125, 0.61))
    ]
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    report.write_loglog_svg(records, a, "uniform sweep")
    report.write_loglog_svg(records, b, "uniform sweep")
    data = a.read_bytes()
    assert data == b.read_bytes()
    assert data.lstrip().startswith(b"<?xml")

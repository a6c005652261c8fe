"""Artifact emission: CSV sweep tables, JSON verdicts, SVG log-log plots.

Every writer is deterministic: floats are serialized with ``repr``, JSON
keys are sorted, and the SVG backend is salted so identical inputs give
byte-identical files.
"""

import json
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import ConfigError, FieldEvalError
from .fields import TableField
from .quadrature import triangle_rule

__all__ = [
    "CSV_COLUMNS",
    "Verdict",
    "records_to_csv",
    "write_csv",
    "write_verdicts",
    "write_loglog_svg",
    "save_field",
    "load_field",
    "save_scalar_table",
    "load_scalar_table",
]

#: frozen sweep-table schema; never reorder
CSV_COLUMNS = (
    "epsilon",
    "p",
    "grad_lp",
    "pressure_lp",
    "source_lp",
    "ratio",
    "dofs",
    "seconds",
)

_STATUSES = ("pass", "fail", "inconclusive", "extrapolated")


@dataclass
class Verdict:
    """One checked claim: anchor, outcome, and the numbers behind it."""

    claim: str
    status: str
    measured: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.claim:
            raise ConfigError("verdict claim anchor must be nonempty")
        if self.status not in _STATUSES:
            raise ConfigError(f"unknown verdict status {self.status!r}")
        if self.status in ("pass", "fail") and not self.thresholds:
            raise ConfigError(
                "pass/fail verdicts must carry the thresholds that "
                "produced them"
            )


def _cell(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def records_to_csv(records):
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        lines.append(
            ",".join(_cell(getattr(r, col)) for col in CSV_COLUMNS)
        )
    return "\n".join(lines) + "\n"


def write_csv(records, path):
    with open(path, "w") as fh:
        fh.write(records_to_csv(records))


def _jsonable(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


def write_verdicts(verdicts, path):
    payload = [
        {
            "claim": v.claim,
            "status": v.status,
            "measured": _jsonable(v.measured),
            "thresholds": _jsonable(v.thresholds),
        }
        for v in verdicts
    ]
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


# -- field exchange files -----------------------------------------------


def save_field(coeffs, mesh, path):
    """Velocity coefficients as text, checksummed against their mesh."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (mesh.n_p2, 2):
        raise FieldEvalError("velocity coefficient shape mismatch")
    lines = [f"field v1 {mesh.n_p2} {mesh.checksum()}"]
    for vx, vy in coeffs:
        lines.append(f"{float(vx)!r} {float(vy)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_field(path, mesh):
    with open(path) as fh:
        header = fh.readline().split()
        if header[:2] != ["field", "v1"]:
            raise FieldEvalError("not a field v1 file")
        n = int(header[2])
        if header[3] != mesh.checksum():
            raise FieldEvalError("field was written for a different mesh")
        coeffs = np.array(
            [[float(v) for v in fh.readline().split()] for _ in range(n)]
        )
    return coeffs


def save_scalar_table(table, path):
    """Scalar quadrature table as text, checksummed against its mesh."""
    nt, nq = table.values.shape
    lines = [
        f"scalartable v1 {nt} {nq} {table.degree} {table.mesh.checksum()}"
    ]
    for row in table.values:
        lines.append(" ".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_scalar_table(path, mesh):
    with open(path) as fh:
        header = fh.readline().split()
        if header[:2] != ["scalartable", "v1"]:
            raise FieldEvalError("not a scalartable v1 file")
        nt, nq, degree = int(header[2]), int(header[3]), int(header[4])
        if header[5] != mesh.checksum():
            raise FieldEvalError("table was written for a different mesh")
        vals = np.array(
            [[float(v) for v in fh.readline().split()] for _ in range(nt)]
        )
    if vals.shape != (nt, nq) or nt != mesh.nt:
        raise FieldEvalError("table shape does not match the mesh")
    bary, _ = triangle_rule(degree)
    if len(bary) != nq:
        raise FieldEvalError("table width does not match its quadrature rule")
    return TableField(mesh, degree, vals)


def write_loglog_svg(records, path, title):
    """Ratio against 1/epsilon on log-log axes, with the fitted slope."""
    eps = np.array([r.epsilon for r in records])
    ratio = np.array([r.ratio for r in records])
    plt.rcParams["svg.hashsalt"] = "stokeslab"
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(1.0 / eps, np.maximum(ratio, 1e-300), "o-", label="measured")
    positive = ratio > 0
    if np.count_nonzero(positive) >= 2:
        slope, intercept = np.polyfit(
            np.log(1.0 / eps[positive]), np.log(ratio[positive]), 1
        )
        ax.loglog(
            1.0 / eps,
            np.exp(intercept) * (1.0 / eps) ** slope,
            "--",
            label=f"slope {slope:.3f}",
        )
    ax.set_xlabel(r"$1/\varepsilon$")
    ax.set_ylabel("estimate ratio")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)

"""Bounded divergence inverse on perforated domains.

The operator is a three-stage composition: extend the datum by zero into
the holes, invert the divergence on the full square with the
pointwise-divergence-exact element pair, then restrict back to the
perforated domain.  Because the extension is zero on hole interiors, the
intermediate field's divergence vanishes there pointwise, and restriction
preserves it; the composed operator therefore reproduces the datum in the
discrete divergence sense.
"""

from dataclasses import dataclass

import numpy as np

from . import fem
from .errors import CompatibilityError, ConfigError, FieldEvalError
from .fields import TableField, quadrature_weights
from .norms import NormReport, estimate_ratio, lp_norm
from .perforated import WORK_DEGREE, restrict, restriction_exponent

__all__ = [
    "mean_zero_table",
    "zero_extend",
    "bogovskii_reference",
    "bogovskii_perforated",
    "divergence_residual",
    "measure_bogovskii_constant",
]


def mean_zero_table(mesh, values_or_field, degree=WORK_DEGREE):
    """Validate a scalar datum as mean-zero on ``mesh`` and return its table.

    Accepts a quadrature-value array or any scalar field; rejects data
    whose mean exceeds 10⁻¹⁰ of the field's own magnitude.
    """
    if isinstance(values_or_field, TableField):
        vals = values_or_field.sample(mesh, degree)
    elif isinstance(values_or_field, np.ndarray):
        vals = values_or_field
    else:
        vals = values_or_field.sample(mesh, degree)
    W = quadrature_weights(mesh, degree)
    if vals.shape != W.shape:
        raise FieldEvalError("scalar table shape does not match the mesh")
    mean = float(np.sum(W * vals))
    scale = float(np.sum(np.abs(W) * np.abs(vals)))
    if abs(mean) > 1e-10 * max(scale, 1e-300):
        raise CompatibilityError(
            f"datum has nonzero mean {mean:.3e} (magnitude {scale:.3e})",
            mismatch=mean,
        )
    return TableField(mesh, degree, vals)


def zero_extend(ms, f):
    """Extend a mean-zero datum on the perforated mesh by zero into D.

    The integral and every p-norm are preserved exactly: the extension
    only adds zero-valued quadrature rows.
    """
    table = mean_zero_table(ms.fluid, f)
    ext = np.zeros((ms.full.nt,) + table.values.shape[1:])
    ext[ms.fluid_tri_ids] = table.values
    return TableField(ms.full, table.degree, ext)


def _reference_base(ms):
    if not ms.refined:
        raise ConfigError(
            "the divergence inverse needs a barycentric-refined mesh set "
            "(build with refine=True)"
        )
    if "bogovskii_base" not in ms._cache:
        ms._cache["bogovskii_base"] = fem.assemble(
            ms.full,
            pressure_space="dp1",
            quad_degree=WORK_DEGREE,
        )
    return ms._cache["bogovskii_base"]


def bogovskii_reference(ms, f):
    """Divergence inverse on the full square D with zero boundary data.

    ``f`` is a mean-zero scalar table on the full mesh; the returned
    velocity has pointwise divergence equal to the element-wise linear
    projection of ``f`` — in particular exactly zero wherever ``f`` is.
    """
    table = mean_zero_table(ms.full, f)
    system = fem.reuse_system(_reference_base(ms), div_data=table)
    return fem.solve(system)


def bogovskii_perforated(ms, f):
    """The composed divergence inverse on the perforated domain.

    Returns velocity coefficients on the perforated mesh with zero trace
    on all of its boundary and discrete divergence equal to ``f``.
    """
    w = bogovskii_reference(ms, zero_extend(ms, f))
    return restrict(ms, w.velocity)


def divergence_residual(ms, coeffs, f):
    """Relative divergence defect of ``coeffs`` against the datum ``f``.

    Tested in the continuous-linear pressure space on the perforated
    mesh, the space every stage of the composition controls.
    """
    table = mean_zero_table(ms.fluid, f)
    B = fem.divergence_matrix(ms.fluid, "p1", WORK_DEGREE)
    load, _ = fem.divergence_load(ms.fluid, table, "p1", WORK_DEGREE)
    r = B @ np.asarray(coeffs, dtype=float).ravel() - load
    scale = max(float(np.linalg.norm(load)), 1e-300)
    return float(np.linalg.norm(r)) / scale


def measure_bogovskii_constant(ms, coeffs, f, p):
    """Norm of the inverse relative to the scaling-predicted bound.

    Measures ``‖∇v‖_p / ((1 + ε^exponent) ‖f‖_p)`` for the output
    ``coeffs`` of the perforated inverse applied to ``f``.
    """
    table = mean_zero_table(ms.fluid, f)
    num = lp_norm(
        fem.velocity_gradient_table(ms.fluid, coeffs, WORK_DEGREE),
        ms.fluid,
        p,
    )
    fnorm = lp_norm(table, ms.fluid, p, degree=WORK_DEGREE)
    pd = ms.pd
    weight = 1.0 + pd.epsilon ** restriction_exponent(p, 2, pd.alpha)
    return estimate_ratio(num, NormReport(weight * fnorm.value, p))

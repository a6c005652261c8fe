"""Restriction operator: identity, locality, divergence, and scale checks.

Unit tests run on small 2x2 perforations; the documented-tolerance 4x4
sweeps live in the acceptance suite.
"""

import numpy as np
import pytest

from stokeslab import fem
from stokeslab import perforated as pf
from stokeslab.errors import (
    CompatibilityError,
    ConfigError,
    FieldEvalError,
)
from stokeslab.fields import CallableField, constant_field
from stokeslab.geometry import build_perforated
from stokeslab.norms import lp_norm


@pytest.fixture(scope="module")
def ms():
    pd = build_perforated(side=1.0, n=2, alpha=1.0, seed=7)
    return pf.build_mesh_set(pd, n_hole=16)


@pytest.fixture(scope="module")
def ms_refined():
    pd = build_perforated(side=1.0, n=2, alpha=1.0, seed=7)
    return pf.build_mesh_set(pd, n_hole=16, refine=True)


def smooth_coeffs(ms):
    """Generic smooth field, nonzero on the holes."""
    c = ms.full.p2_coords()
    s = ms.pd.side
    return np.column_stack(
        [
            np.sin(2 * np.pi * c[:, 0] / s) * c[:, 1],
            np.cos(2 * np.pi * c[:, 1] / s) * (c[:, 0] + 0.3),
        ]
    )


def supported_coeffs(ms):
    """Smooth field with exact zeros on every hole-closure node."""
    pd = ms.pd
    c = ms.full.p2_coords()
    r_hole = pd.hole_scale() * pd.hole.max_radius()
    d = np.full(len(c), np.inf)
    for k in range(pd.n_cells):
        d = np.minimum(d, np.hypot(*(c - pd.center(k)).T))
    s = np.clip((d - r_hole) / (pd.ball_radius() - r_hole), 0.0, 1.0)
    u = (s * s * (3 - 2 * s))[:, None] * smooth_coeffs(ms)
    hole_nodes = np.setdiff1d(np.arange(ms.full.n_p2), ms.fluid_p2)
    u[hole_nodes] = 0.0
    return u


# -- mesh set structure -------------------------------------------------


def test_mesh_set_structure(ms):
    pd = ms.pd
    assert len(ms.cells) == pd.n_cells
    assert ms.fluid.nt + pd.n_cells * len(ms.cells[0].hole_tri_ids) == ms.full.nt
    for cell in ms.cells:
        assert sorted(set(cell.mesh.btags)) == ["hole", "outer"]


def test_p2_map_matches_coordinates(ms):
    full_coords = ms.full.p2_coords()
    assert np.array_equal(full_coords[ms.fluid_p2], ms.fluid.p2_coords())
    for cell in ms.cells:
        assert np.array_equal(
            full_coords[cell.p2_map], cell.mesh.p2_coords()
        )


def test_annulus_boundary_radii(ms):
    pd = ms.pd
    for cell in ms.cells[:2]:
        coords = cell.mesh.vertices
        for tag, radius in (("hole", pd.hole_scale() * pd.hole.max_radius()),
                            ("outer", pd.ball_radius())):
            sel = np.isin(cell.mesh.btags, [tag])
            nodes = np.unique(cell.mesh.bedges[sel])
            r = np.hypot(*(coords[nodes] - pd.center(cell.k)).T)
            assert np.allclose(r, radius, rtol=1e-12)


# -- the operator -------------------------------------------------------


def test_zero_maps_to_zero(ms):
    out = pf.restrict(ms, np.zeros((ms.full.n_p2, 2)))
    assert np.max(np.abs(out)) == 0.0


def test_shape_mismatch_rejected(ms):
    with pytest.raises(FieldEvalError):
        pf.restrict(ms, np.zeros((7, 2)))


def test_extension_identity(ms):
    u = supported_coeffs(ms)
    ru = pf.restrict(ms, u)
    scale = np.max(np.abs(u))
    assert np.max(np.abs(ru - u[ms.fluid_p2])) <= 1e-8 * scale


def test_locality_outside_balls(ms):
    # no arithmetic happens outside the annuli: exact equality there
    pd = ms.pd
    u = smooth_coeffs(ms)
    ru = pf.restrict(ms, u)
    coords = ms.fluid.p2_coords()
    outside = np.full(len(coords), True)
    for k in range(pd.n_cells):
        outside &= np.hypot(*(coords - pd.center(k)).T) > pd.ball_radius() + 1e-12
    assert np.array_equal(ru[outside], u[ms.fluid_p2][outside])


def test_zero_trace_on_holes(ms):
    ru = pf.restrict(ms, smooth_coeffs(ms))
    hole_nodes = ms.fluid.boundary_p2_nodes(["hole"])
    assert np.max(np.abs(ru[hole_nodes])) == 0.0


def test_linearity(ms):
    u = smooth_coeffs(ms)
    v = supported_coeffs(ms)
    lhs = pf.restrict(ms, 2.0 * u + 3.0 * v)
    rhs = 2.0 * pf.restrict(ms, u) + 3.0 * pf.restrict(ms, v)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(lhs))


def test_divergence_preservation(ms_refined):
    # a pointwise-divergence-free input stays discretely divergence-free
    ms = ms_refined
    from stokeslab.experiments import offset_bump_source

    sol = fem.solve(
        fem.assemble(
            ms.full,
            rhs=fem.DivForm(offset_bump_source()),
            pressure_space="dp1",
            quad_degree=6,
        )
    )
    ru = pf.restrict(ms, sol.velocity)
    B = fem.divergence_matrix(ms.fluid, "p1", pf.WORK_DEGREE)
    r = B @ ru.ravel()
    scale = lp_norm(
        fem.velocity_gradient_table(ms.fluid, ru, pf.WORK_DEGREE),
        ms.fluid,
        2.0,
    ).value
    assert np.linalg.norm(r) <= 1e-8 * max(scale, 1e-30)


def test_cell_order_irrelevant(ms):
    # cell problems are independent; solving in reversed order matches
    u = smooth_coeffs(ms)
    ru = pf.restrict(ms, u)
    out = u[ms.fluid_p2].copy()
    for cell in reversed(ms.cells):
        sol = pf._solve_cell(ms, cell, u)
        out[ms.full_to_fluid_p2[cell.p2_map]] = sol.velocity
    assert np.array_equal(ru, out)


# -- exponent arithmetic ------------------------------------------------


def test_restriction_exponent_values():
    assert pf.restriction_exponent(2.0, 3, 3.0) == pytest.approx(0.0)
    assert pf.restriction_exponent(2.0, 3, 1.0) == pytest.approx(-1.0)
    for alpha in (1.0, 2.0, 5.0):
        assert pf.restriction_exponent(2.0, 2, alpha) == pytest.approx(-1.0)


def test_restriction_exponent_domain():
    with pytest.raises(ConfigError):
        pf.restriction_exponent(2.5, 2, 1.0)


# -- measured constants -------------------------------------------------


def test_constant_sweep_skips_zero_fields():
    pds = [
        build_perforated(side=4 * e, n=2, alpha=1.0, seed=1)
        for e in (0.25, 0.125)
    ]
    zero = constant_field(np.zeros(2))

    def bump(pts):
        # evaluated on meshes of different extent; normalize per point set
        b = np.sin(np.pi * pts[:, 0]) * np.sin(np.pi * pts[:, 1])
        return np.column_stack([b * b, 0.3 * b])

    table, verdict = pf.restriction_constant_sweep(
        pds, [zero, CallableField(bump, (2,))], 2.0
    )
    assert all(row[0] is None for row in table)
    assert all(row[1] is not None and row[1] > 0.0 for row in table)
    assert verdict in ("bounded", "inconclusive")


# -- cutoff lift --------------------------------------------------------


def test_lift_domain_error():
    with pytest.raises(ConfigError):
        pf.lift_zero_on_hole(constant_field(np.ones(2)), eta=0.5)


def test_lift_zero_field():
    mesh, coeffs, report = pf.lift_zero_on_hole(
        constant_field(np.zeros(2)), eta=0.25
    )
    assert np.max(np.abs(coeffs)) == 0.0
    assert report["grad_norm"] == 0.0


def test_lift_boundary_values():
    one = constant_field(np.array([1.0, 0.0]))
    mesh, coeffs, report = pf.lift_zero_on_hole(one, eta=0.25)
    hole = mesh.boundary_p2_nodes(["hole"])
    outer = mesh.boundary_p2_nodes(["outer"])
    assert np.max(np.abs(coeffs[hole])) == 0.0
    assert np.allclose(coeffs[outer, 0], 1.0) and np.allclose(coeffs[outer, 1], 0.0)


def test_lift_cutoff_gradient_bound():
    # constant input: the measured gradient is the cutoff's, below 4/eta
    one = constant_field(np.array([1.0, 0.0]))
    for eta in (0.25, 0.125):
        mesh, coeffs, report = pf.lift_zero_on_hole(one, eta=eta)
        table = fem.velocity_gradient_table(mesh, coeffs, pf.WORK_DEGREE)
        assert np.max(np.abs(table.values)) <= 4.0 / eta
        assert report["weight"] == pytest.approx(1.0)  # d/p - 1 = 0


# -- local divergence inverse -------------------------------------------


def balanced_pair():
    def fn(pts):
        r1 = np.hypot(pts[:, 0] - 0.6, pts[:, 1])
        r2 = np.hypot(pts[:, 0] + 0.6, pts[:, 1])
        return np.exp(-(r1 / 0.2) ** 2) - np.exp(-(r2 / 0.2) ** 2)

    return CallableField(fn, ())


def test_local_bogovskii_zero():
    sol, ratio = pf.local_uniform_bogovskii(constant_field(0.0), eta=0.25)
    assert np.max(np.abs(sol.velocity)) <= 1e-12
    assert ratio == 0.0


def test_local_bogovskii_mean_violation():
    with pytest.raises(CompatibilityError):
        pf.local_uniform_bogovskii(constant_field(1.0), eta=0.25)


def test_local_bogovskii_uniform_band():
    ratios = [
        pf.local_uniform_bogovskii(balanced_pair(), eta=eta)[1]
        for eta in (0.25, 0.125, 0.0625)
    ]
    assert max(ratios) / min(ratios) <= 1.5


# -- unit-annulus rescale -----------------------------------------------


def test_unit_annulus_zero(ms):
    chk = pf.unit_annulus_consistency(ms, 0, np.zeros((ms.full.n_p2, 2)))
    assert chk.velocity_discrepancy == 0.0


@pytest.mark.parametrize("alpha,side", [(1.0, 1.0), (2.0, 0.5)])
def test_unit_annulus_consistency(alpha, side):
    pd = build_perforated(side=side, n=2, alpha=alpha, seed=3)
    ms = pf.build_mesh_set(pd, n_hole=16)
    c = ms.full.p2_coords()
    u = np.column_stack(
        [
            np.sin(np.pi * c[:, 0] / side) * np.sin(np.pi * c[:, 1] / side),
            (c[:, 0] / side) * (1 - c[:, 0] / side),
        ]
    )
    chk = pf.unit_annulus_consistency(ms, 1, u)
    assert chk.velocity_discrepancy <= 1e-8
    assert chk.pressure_discrepancy <= 1e-8

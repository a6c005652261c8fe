"""Stokes solver verification against a symbolically derived exact solution."""

import numpy as np
import pytest
import sympy

from stokeslab import fem
from stokeslab.errors import CompatibilityError, ConfigError, FieldEvalError
from stokeslab.fields import (
    CallableField,
    constant_field,
    quadrature_points,
    quadrature_weights,
)
from stokeslab.mesh import alfeld_refine, structured_square_mesh

# -- exact solution on the unit square, derived symbolically ------------
# stream function psi vanishes to second order on the boundary, so the
# velocity u = curl psi has zero trace and is exactly divergence free.

_x, _y = sympy.symbols("x y")
_psi = (_x * (1 - _x) * _y * (1 - _y)) ** 2
_u = [sympy.diff(_psi, _y), -sympy.diff(_psi, _x)]
_p = _x - sympy.Rational(1, 2)
_grad_u = [[sympy.diff(_u[i], v) for v in (_x, _y)] for i in range(2)]
# G = -grad u + p I, so that div G = -lap u + grad p and div u = 0
_G = [
    [-_grad_u[0][0] + _p, -_grad_u[0][1]],
    [-_grad_u[1][0], -_grad_u[1][1] + _p],
]

_u_fn = sympy.lambdify((_x, _y), _u, "numpy")
_p_fn = sympy.lambdify((_x, _y), _p, "numpy")
_grad_u_fn = sympy.lambdify((_x, _y), _grad_u, "numpy")
_G_fn = sympy.lambdify((_x, _y), _G, "numpy")


def exact_velocity(pts):
    return np.stack(_u_fn(pts[:, 0], pts[:, 1]), axis=-1)


def exact_source():
    def fn(pts):
        out = np.array(_G_fn(pts[:, 0], pts[:, 1]), dtype=float)
        return np.moveaxis(out, -1, 0)

    return CallableField(fn, shape=(2, 2))


def solve_manufactured(m, pressure_space="p1"):
    mesh = structured_square_mesh(0.0, 1.0, m)
    system = fem.assemble(
        mesh, rhs=fem.DivForm(exact_source()), pressure_space=pressure_space
    )
    return fem.solve(system)


def errors_against_exact(sol, degree=6):
    mesh = sol.mesh
    W = quadrature_weights(mesh, degree)
    qp = quadrature_points(mesh, degree)
    gh = sol.gradient_field(degree).values
    ge = np.moveaxis(
        np.array(_grad_u_fn(qp[..., 0], qp[..., 1])), [-2, -1], [0, 1]
    )
    err_h1 = float(np.sqrt(np.sum(W[..., None, None] * (gh - ge) ** 2)))
    ph = sol.pressure_field(degree).values
    pe = _p_fn(qp[..., 0], qp[..., 1])
    err_p = float(np.sqrt(np.sum(W * (ph - pe) ** 2)))
    return err_h1, err_p


# -- convergence --------------------------------------------------------


def test_manufactured_convergence_rates():
    errs = [errors_against_exact(solve_manufactured(m)) for m in (8, 16, 32)]
    rates_v = [np.log2(errs[i][0] / errs[i + 1][0]) for i in range(2)]
    rates_p = [np.log2(errs[i][1] / errs[i + 1][1]) for i in range(2)]
    assert min(rates_v) >= 1.8
    assert min(rates_p) >= 1.8


def test_solution_invariants():
    sol = solve_manufactured(16)
    assert abs(sol.pressure_mean()) <= 1e-10
    assert abs(sol.multiplier) <= 1e-12
    assert sol.residual <= 1e-9
    # interpolated Dirichlet data is reproduced exactly on the boundary
    bnodes = sol.mesh.boundary_p2_nodes(["outer"])
    assert np.all(sol.velocity[bnodes] == 0.0)


def test_point_evaluation_matches_exact():
    sol = solve_manufactured(32)
    pt = np.array([0.3, 0.4])
    vel, pres = fem.evaluate_at(sol, pt)
    assert np.linalg.norm(vel - exact_velocity(pt[None])[0]) <= 1e-4
    assert abs(pres - float(_p_fn(*pt))) <= 1e-3


def test_point_evaluation_outside_mesh():
    sol = solve_manufactured(8)
    with pytest.raises(FieldEvalError):
        fem.evaluate_at(sol, (2.0, 2.0))


# -- structural zero cases ----------------------------------------------


def test_zero_source_gives_zero_solution():
    mesh = structured_square_mesh(0.0, 1.0, 8)
    sol = fem.solve(fem.assemble(mesh))
    assert np.max(np.abs(sol.velocity)) <= 1e-12
    assert np.max(np.abs(sol.pressure)) <= 1e-12


def test_constant_source_gives_zero_solution():
    # a constant matrix source is weakly divergence free against the
    # zero-trace test space, so the load vanishes identically
    mesh = structured_square_mesh(0.0, 1.0, 8)
    G = constant_field(np.array([[2.0, 1.0], [-1.0, 3.0]]))
    sol = fem.solve(fem.assemble(mesh, rhs=fem.DivForm(G)))
    assert np.max(np.abs(sol.velocity)) <= 1e-12
    assert np.max(np.abs(sol.pressure)) <= 1e-11


def test_linear_flow_reproduced_exactly():
    # v = (x, -y) is divergence free and quadratic-exact; prescribing it
    # on the boundary must reproduce it to factorization accuracy
    mesh = structured_square_mesh(0.0, 1.0, 6)
    lin = CallableField(lambda p: np.stack([p[:, 0], -p[:, 1]], axis=-1), (2,))
    sol = fem.solve(fem.assemble(mesh, dirichlet={"outer": lin}))
    expect = np.stack(
        [mesh.p2_coords()[:, 0], -mesh.p2_coords()[:, 1]], axis=-1
    )
    assert np.max(np.abs(sol.velocity - expect)) <= 1e-10


# -- energy inequality --------------------------------------------------


def test_energy_inequality():
    # for zero-trace data the discrete energy identity gives
    # ||grad v||_2 <= ||G||_2 with constant one
    sol = solve_manufactured(16)
    deg = fem.ASSEMBLY_DEGREE
    W = quadrature_weights(sol.mesh, deg)
    grad = sol.gradient_field(deg).values
    Gq = exact_source().sample(sol.mesh, deg)
    lhs = np.sqrt(np.sum(W[..., None, None] * grad**2))
    rhs = np.sqrt(np.sum(W[..., None, None] * Gq**2))
    assert lhs <= rhs + 1e-9


# -- prescribed divergence ----------------------------------------------


def test_prescribed_divergence_pointwise_on_split_mesh():
    # with discontinuous linear pressure on a barycentric-refined mesh the
    # discrete divergence equals the projected datum pointwise
    f = CallableField(lambda p: p[:, 0] - 0.5, ())
    mesh = alfeld_refine(structured_square_mesh(0.0, 1.0, 8))
    sol = fem.solve_prescribed_divergence(mesh, f, pressure_space="dp1")
    div = sol.divergence_field(6).values
    qp = quadrature_points(mesh, 6)
    assert np.max(np.abs(div - (qp[..., 0] - 0.5))) <= 1e-10


def test_prescribed_divergence_weak_on_th_mesh():
    f = CallableField(lambda p: p[:, 0] - 0.5, ())
    mesh = structured_square_mesh(0.0, 1.0, 8)
    sol = fem.solve_prescribed_divergence(mesh, f, pressure_space="p1")
    # weakly enforced only: tested against continuous linear functions
    r = sol.mesh
    system = fem.assemble(r, div_data=f, check_compatibility=False)
    weak = system.B @ sol.velocity.ravel() - system.Gdiv
    assert np.max(np.abs(weak)) <= 1e-10


def test_incompatible_divergence_rejected():
    mesh = structured_square_mesh(0.0, 1.0, 4)
    f = constant_field(1.0)  # nonzero mean with zero boundary data
    with pytest.raises(CompatibilityError) as exc:
        fem.assemble(mesh, div_data=f)
    assert abs(exc.value.mismatch + 1.0) <= 1e-12


def test_multiplier_absorbs_incompatibility():
    mesh = structured_square_mesh(0.0, 1.0, 4)
    f = constant_field(1.0)
    system = fem.assemble(mesh, div_data=f, check_compatibility=False)
    sol = fem.solve(system)
    # mean-row multiplier takes up exactly -mismatch / |domain|
    assert abs(sol.multiplier - 1.0) <= 1e-10


# -- alternative right-hand sides ---------------------------------------


def test_weak_laplacian_rhs_matches_matrix_product():
    mesh = structured_square_mesh(0.0, 1.0, 4)
    rng = np.random.default_rng(7)
    coeffs = rng.standard_normal((mesh.n_p2, 2))
    system = fem.assemble(mesh, rhs=fem.WeakLaplacianOf(coeffs))
    assert np.allclose(system.F, system.A @ coeffs.ravel(), atol=0.0)


def test_body_force_rhs():
    # -lap v + grad pi = f with f = div G for the manufactured G gives the
    # same discrete solution up to quadrature differences
    f_sym = [
        sum(sympy.diff(_G[i][j], v) for j, v in enumerate((_x, _y)))
        for i in range(2)
    ]
    f_fn = sympy.lambdify((_x, _y), f_sym, "numpy")
    f = CallableField(
        lambda p: np.stack(f_fn(p[:, 0], p[:, 1]), axis=-1), (2,)
    )
    mesh = structured_square_mesh(0.0, 1.0, 16)
    sol = fem.solve(fem.assemble(mesh, rhs=fem.BodyForce(f), quad_degree=6))
    ref = solve_manufactured(16)
    assert np.max(np.abs(sol.velocity - ref.velocity)) <= 1e-6


# -- boundary-data validation -------------------------------------------


def test_unknown_boundary_tag_rejected():
    mesh = structured_square_mesh(0.0, 1.0, 4)
    with pytest.raises(ConfigError):
        fem.assemble(mesh, dirichlet={"hole": np.zeros(2)})


def test_missing_boundary_tag_rejected():
    mesh = structured_square_mesh(0.0, 1.0, 4)
    with pytest.raises(ConfigError):
        fem.assemble(mesh, dirichlet={})


# -- determinism and io -------------------------------------------------


def test_solve_is_bitwise_deterministic():
    a = solve_manufactured(8)
    b = solve_manufactured(8)
    assert np.array_equal(a.velocity, b.velocity)
    assert np.array_equal(a.pressure, b.pressure)


def test_solution_io_round_trip(tmp_path):
    sol = solve_manufactured(8)
    path = tmp_path / "s.txt"
    fem.save_solution(sol, path)
    assert path.read_text().startswith("stokes v1 ")
    again = fem.load_solution(path, sol.mesh)
    assert np.array_equal(again.velocity, sol.velocity)
    assert np.array_equal(again.pressure, sol.pressure)
    assert again.pressure_space == sol.pressure_space


def test_load_solution_checks_mesh(tmp_path):
    sol = solve_manufactured(8)
    path = tmp_path / "s.txt"
    fem.save_solution(sol, path)
    other = structured_square_mesh(0.0, 1.0, 4)
    with pytest.raises(FieldEvalError):
        fem.load_solution(path, other)

"""Mixed finite-element Stokes solver.

Velocity is continuous piecewise-quadratic (vector P2); pressure is either
continuous piecewise-linear (``p1``) or discontinuous piecewise-linear
(``dp1``).  On barycentric-refined meshes the ``dp1`` pair renders the
discrete divergence pointwise equal to the projected datum, which the
restriction / divergence-inverse compositions rely on.

The saddle-point system is symmetrized by negating the pressure unknown
and closed with a single mean-pressure constraint row whose multiplier
absorbs (and reports) any divergence-data incompatibility.
"""

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    CompatibilityError,
    ConfigError,
    FieldEvalError,
    SolverError,
)
from .fields import Field, TableField, quadrature_weights
from .quadrature import edge_rule, triangle_rule

__all__ = [
    "DivForm",
    "WeakLaplacianOf",
    "BodyForce",
    "SaddleSystem",
    "StokesSolution",
    "assemble",
    "reuse_system",
    "divergence_load",
    "solve",
    "solve_prescribed_divergence",
    "velocity_value_table",
    "velocity_gradient_table",
    "velocity_divergence_table",
    "evaluate_at",
    "boundary_flux",
    "save_solution",
    "load_solution",
]

#: default quadrature degree for assembly (exact for all bilinear forms here)
ASSEMBLY_DEGREE = 4


# -- right-hand-side descriptions ---------------------------------------


@dataclass
class DivForm:
    """Source div G: contributes -∫ G : ∇φ."""

    G: Field


@dataclass
class WeakLaplacianOf:
    """Source -Δu for a coefficient field u: contributes ∫ ∇u : ∇φ."""

    coeffs: np.ndarray  # (n_p2, 2) velocity coefficients on the same mesh


@dataclass
class BodyForce:
    """Source f: contributes ∫ f · φ."""

    f: Field


# -- reference P2 basis -------------------------------------------------


def p2_basis(bary):
    """P2 shape functions at barycentric points: (nq, 6).

    Node order matches ``TriMesh.tri_p2``: three vertices, then midside
    nodes opposite each vertex (m12, m20, m01).
    """
    l0, l1, l2 = bary[:, 0], bary[:, 1], bary[:, 2]
    return np.column_stack(
        [
            l0 * (2 * l0 - 1),
            l1 * (2 * l1 - 1),
            l2 * (2 * l2 - 1),
            4 * l1 * l2,
            4 * l2 * l0,
            4 * l0 * l1,
        ]
    )


def p2_basis_dl(bary):
    """Derivatives of P2 shape functions w.r.t. barycentric coords: (nq, 6, 3)."""
    nq = len(bary)
    l0, l1, l2 = bary[:, 0], bary[:, 1], bary[:, 2]
    d = np.zeros((nq, 6, 3))
    d[:, 0, 0] = 4 * l0 - 1
    d[:, 1, 1] = 4 * l1 - 1
    d[:, 2, 2] = 4 * l2 - 1
    d[:, 3, 1] = 4 * l2
    d[:, 3, 2] = 4 * l1
    d[:, 4, 2] = 4 * l0
    d[:, 4, 0] = 4 * l2
    d[:, 5, 0] = 4 * l1
    d[:, 5, 1] = 4 * l0
    return d


def barycentric_gradients(mesh):
    """∇λ_k per triangle: (nt, 3, 2)."""
    p = mesh.vertices[mesh.triangles]
    areas = mesh.signed_areas()
    g = np.empty((mesh.nt, 3, 2))
    for k in range(3):
        e = p[:, (k + 2) % 3] - p[:, (k + 1) % 3]
        g[:, k, 0] = -e[:, 1]
        g[:, k, 1] = e[:, 0]
    g /= 2.0 * areas[:, None, None]
    return g


# -- pressure spaces ----------------------------------------------------


def pressure_dof_count(mesh, pressure_space):
    if pressure_space == "p1":
        return mesh.nv
    if pressure_space == "dp1":
        return 3 * mesh.nt
    raise ConfigError(f"unknown pressure space {pressure_space!r}")


def pressure_dof_map(mesh, pressure_space):
    """(nt, 3) global pressure dof per triangle corner."""
    if pressure_space == "p1":
        return mesh.triangles
    return np.arange(3 * mesh.nt).reshape(mesh.nt, 3)


# -- assembled system ---------------------------------------------------


@dataclass
class SaddleSystem:
    mesh: object
    pressure_space: str
    A: sp.csr_matrix  # full velocity Laplacian (2*n_p2 square)
    B: sp.csr_matrix  # divergence coupling (n_p x 2*n_p2)
    mean_row: np.ndarray  # ∫ q dx per pressure dof
    F: np.ndarray  # velocity load vector (2*n_p2)
    Gdiv: np.ndarray  # divergence data tested against pressure basis
    free: np.ndarray  # boolean mask of non-Dirichlet velocity dofs
    dirichlet_values: np.ndarray  # (n_p2, 2), zero on free nodes
    quad_degree: int = ASSEMBLY_DEGREE
    _cache: dict = field(default_factory=dict, repr=False)


def velocity_laplacian(mesh, quad_degree=ASSEMBLY_DEGREE):
    """Vector-P2 stiffness matrix ∫ ∇φ_i : ∇φ_j, shape (2 n_p2, 2 n_p2)."""
    bary, _ = triangle_rule(quad_degree)
    W = quadrature_weights(mesh, quad_degree)
    dN = np.einsum(
        "qik,tkd->tqid", p2_basis_dl(bary), barycentric_gradients(mesh)
    )
    A_loc = np.einsum("tq,tqid,tqjd->tij", W, dN, dN)
    t6 = mesh.tri_p2()
    n = 2 * mesh.n_p2
    rows, cols, vals = [], [], []
    for c in (0, 1):
        gd = 2 * t6 + c  # (nt, 6)
        rows.append(np.repeat(gd, 6, axis=1).ravel())
        cols.append(np.tile(gd, (1, 6)).ravel())
        vals.append(A_loc.reshape(mesh.nt, -1).ravel())
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    return A.tocsr()


def divergence_matrix(mesh, pressure_space, quad_degree=ASSEMBLY_DEGREE):
    """Pressure-tested divergence ∫ q_k div φ_i, shape (n_p, 2 n_p2)."""
    bary, _ = triangle_rule(quad_degree)
    W = quadrature_weights(mesh, quad_degree)
    dN = np.einsum(
        "qik,tkd->tqid", p2_basis_dl(bary), barycentric_gradients(mesh)
    )
    # B_loc[t, k, i, c] = sum_q W[t,q] * lambda_k(q) * dN[t,q,i,c]
    B_loc = np.einsum("tq,qk,tqic->tkic", W, bary, dN)
    t6 = mesh.tri_p2()
    pmap = pressure_dof_map(mesh, pressure_space)
    np_ = pressure_dof_count(mesh, pressure_space)
    rows = np.repeat(pmap[:, :, None, None], 6, axis=2)
    rows = np.repeat(rows, 2, axis=3)
    cols = np.empty((mesh.nt, 3, 6, 2), dtype=np.int64)
    for c in (0, 1):
        cols[:, :, :, c] = (2 * t6 + c)[:, None, :]
    B = sp.coo_matrix(
        (B_loc.ravel(), (rows.ravel(), cols.ravel())),
        shape=(np_, 2 * mesh.n_p2),
    )
    return B.tocsr()


def pressure_mean_row(mesh, pressure_space):
    areas = mesh.signed_areas()
    np_ = pressure_dof_count(mesh, pressure_space)
    m = np.zeros(np_)
    pmap = pressure_dof_map(mesh, pressure_space)
    np.add.at(m, pmap.ravel(), np.repeat(areas / 3.0, 3))
    return m


def _rhs_vector(mesh, rhs, A, quad_degree):
    n = 2 * mesh.n_p2
    if rhs is None:
        return np.zeros(n)
    if isinstance(rhs, WeakLaplacianOf):
        coeffs = np.asarray(rhs.coeffs, dtype=float)
        if coeffs.shape != (mesh.n_p2, 2):
            raise FieldEvalError("velocity coefficient shape mismatch")
        return A @ coeffs.ravel()
    bary, _ = triangle_rule(quad_degree)
    W = quadrature_weights(mesh, quad_degree)
    t6 = mesh.tri_p2()
    F = np.zeros(n)
    if isinstance(rhs, DivForm):
        Gq = rhs.G.sample(mesh, quad_degree)  # (nt, nq, 2, 2)
        dN = np.einsum(
            "qik,tkd->tqid", p2_basis_dl(bary), barycentric_gradients(mesh)
        )
        F_loc = -np.einsum("tq,tqcd,tqid->tic", W, Gq, dN)
    elif isinstance(rhs, BodyForce):
        fq = rhs.f.sample(mesh, quad_degree)  # (nt, nq, 2)
        N = p2_basis(bary)
        F_loc = np.einsum("tq,tqc,qi->tic", W, fq, N)
    else:
        raise ConfigError(f"unknown right-hand side {type(rhs).__name__}")
    for c in (0, 1):
        np.add.at(F, (2 * t6 + c).ravel(), F_loc[:, :, c].ravel())
    return F


def _interpolate_dirichlet(mesh, dirichlet):
    """Nodal Dirichlet values and the constrained-dof mask."""
    tags_present = set(np.unique(mesh.btags))
    unknown = set(dirichlet) - tags_present
    if unknown:
        raise ConfigError(f"unknown boundary tags: {sorted(unknown)}")
    missing = tags_present - set(dirichlet)
    if missing:
        raise ConfigError(f"boundary tags without Dirichlet data: {sorted(missing)}")
    vals = np.zeros((mesh.n_p2, 2))
    fixed = np.zeros(mesh.n_p2, dtype=bool)
    coords = mesh.p2_coords()
    for tag, data in dirichlet.items():
        nodes = mesh.boundary_p2_nodes([tag])
        if isinstance(data, Field):
            vals[nodes] = data(coords[nodes])
        else:
            data = np.asarray(data, dtype=float)
            if data.shape == (mesh.n_p2, 2):
                vals[nodes] = data[nodes]
            elif data.shape == (2,):
                vals[nodes] = data
            else:
                raise FieldEvalError(
                    "Dirichlet data must be a Field, a (2,) constant, or a "
                    "full (n_p2, 2) nodal array"
                )
        fixed[nodes] = True
    vals[~fixed] = 0.0
    free = np.repeat(~fixed, 2)
    return vals, free


def divergence_load(mesh, div_data, pressure_space, quad_degree=ASSEMBLY_DEGREE):
    """Divergence data tested against the pressure basis.

    Returns ``(load, total)`` where ``load[k] = ∫ q_k f`` and ``total`` is
    ``∫ f`` over the mesh, both by the given quadrature rule.
    """
    np_ = pressure_dof_count(mesh, pressure_space)
    if div_data is None:
        return np.zeros(np_), 0.0
    bary, _ = triangle_rule(quad_degree)
    W = quadrature_weights(mesh, quad_degree)
    fq = div_data.sample(mesh, quad_degree)
    loc = np.einsum("tq,qk,tq->tk", W, bary, fq)
    load = np.zeros(np_)
    np.add.at(load, pressure_dof_map(mesh, pressure_space).ravel(), loc.ravel())
    return load, float(np.sum(W * fq))


def boundary_flux(mesh, nodal_values):
    """∮ v_h · n ds for the P2 field with the given nodal values (outward)."""
    coords = mesh.p2_coords()
    edges, _ = mesh.edge_data()
    keys = {(int(a), int(b)): i for i, (a, b) in enumerate(edges)}
    btri = mesh.boundary_edge_triangle()
    s, w = edge_rule(3)
    # quadratic trace shape functions at edge parameter s (node order a, m, b)
    Na = (1 - s) * (1 - 2 * s)
    Nm = 4 * s * (1 - s)
    Nb = s * (2 * s - 1)
    total = 0.0
    for (a, b), t in zip(mesh.bedges, btri):
        a, b = int(a), int(b)
        m = mesh.nv + keys[(min(a, b), max(a, b))]
        pa, pb = mesh.vertices[a], mesh.vertices[b]
        tang = pb - pa
        length = float(np.hypot(*tang))
        normal = np.array([tang[1], -tang[0]]) / length
        # orient away from the triangle's opposite vertex
        opp = [v for v in mesh.triangles[t] if v not in (a, b)][0]
        mid = 0.5 * (pa + pb)
        if np.dot(normal, mesh.vertices[opp] - mid) > 0:
            normal = -normal
        vq = (
            Na[:, None] * nodal_values[a]
            + Nm[:, None] * nodal_values[m]
            + Nb[:, None] * nodal_values[b]
        )
        total += length * float(np.sum(w * (vq @ normal)))
    return total


def _check_compatible(mesh, dirichlet_values, total_div):
    flux = boundary_flux(mesh, dirichlet_values)
    scale = max(abs(flux), abs(total_div), 1.0)
    if abs(flux - total_div) > 1e-8 * scale:
        raise CompatibilityError(
            "divergence data incompatible with boundary flux: "
            f"∮v·n = {flux:.3e}, ∫div = {total_div:.3e}",
            mismatch=flux - total_div,
        )


def assemble(
    mesh,
    rhs=None,
    div_data=None,
    dirichlet=None,
    pressure_space="p1",
    quad_degree=ASSEMBLY_DEGREE,
    check_compatibility=True,
):
    """Build the symmetric Stokes saddle system on ``mesh``.

    ``rhs`` is one of :class:`DivForm`, :class:`WeakLaplacianOf`,
    :class:`BodyForce`, or None; ``div_data`` a scalar Field or None;
    ``dirichlet`` maps every boundary tag to its data.
    """
    if quad_degree < 4:
        raise ConfigError("assembly quadrature degree must be at least 4")
    if dirichlet is None:
        dirichlet = {tag: np.zeros(2) for tag in np.unique(mesh.btags)}
    A = velocity_laplacian(mesh, quad_degree)
    B = divergence_matrix(mesh, pressure_space, quad_degree)
    m = pressure_mean_row(mesh, pressure_space)
    F = _rhs_vector(mesh, rhs, A, quad_degree)
    Gdiv, total_div = divergence_load(mesh, div_data, pressure_space, quad_degree)
    vals, free = _interpolate_dirichlet(mesh, dirichlet)
    if check_compatibility:
        _check_compatible(mesh, vals, total_div)
    return SaddleSystem(
        mesh=mesh,
        pressure_space=pressure_space,
        A=A,
        B=B,
        mean_row=m,
        F=F,
        Gdiv=Gdiv,
        free=free,
        dirichlet_values=vals,
        quad_degree=quad_degree,
    )


def reuse_system(system, rhs=None, div_data=None, dirichlet=None,
                 check_compatibility=True):
    """New system with fresh data but shared matrices and factorization.

    Solving many right-hand sides on one mesh then costs a single
    factorization.  The replacement Dirichlet tags must constrain the same
    nodes as the original assembly, otherwise the reduced system (and its
    cached factorization) would change shape.
    """
    mesh = system.mesh
    if dirichlet is None:
        dirichlet = {tag: np.zeros(2) for tag in np.unique(mesh.btags)}
    F = _rhs_vector(mesh, rhs, system.A, system.quad_degree)
    Gdiv, total_div = divergence_load(
        mesh, div_data, system.pressure_space, system.quad_degree
    )
    vals, free = _interpolate_dirichlet(mesh, dirichlet)
    if not np.array_equal(free, system.free):
        raise ConfigError(
            "replacement Dirichlet data constrains a different node set"
        )
    if check_compatibility:
        _check_compatible(mesh, vals, total_div)
    return replace(system, F=F, Gdiv=Gdiv, dirichlet_values=vals)


# -- quadrature tables of coefficient fields ----------------------------


def _check_coeffs(mesh, coeffs):
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (mesh.n_p2, 2):
        raise FieldEvalError("velocity coefficient shape mismatch")
    return coeffs


def velocity_value_table(mesh, coeffs, degree):
    """The P2 field with the given coefficients as a (2,)-valued table."""
    coeffs = _check_coeffs(mesh, coeffs)
    bary, _ = triangle_rule(degree)
    N = p2_basis(bary)
    vals = np.einsum("tic,qi->tqc", coeffs[mesh.tri_p2()], N)
    return TableField(mesh, degree, vals)


def velocity_gradient_table(mesh, coeffs, degree):
    """Gradient as a (2, 2)-valued table: entry [c, d] = ∂_d v_c."""
    coeffs = _check_coeffs(mesh, coeffs)
    bary, _ = triangle_rule(degree)
    dN = np.einsum("qik,tkd->tqid", p2_basis_dl(bary), barycentric_gradients(mesh))
    grad = np.einsum("tic,tqid->tqcd", coeffs[mesh.tri_p2()], dN)
    return TableField(mesh, degree, grad)


def velocity_divergence_table(mesh, coeffs, degree):
    """Divergence as a scalar table."""
    coeffs = _check_coeffs(mesh, coeffs)
    bary, _ = triangle_rule(degree)
    dN = np.einsum("qik,tkd->tqid", p2_basis_dl(bary), barycentric_gradients(mesh))
    div = np.einsum("tic,tqic->tq", coeffs[mesh.tri_p2()], dN)
    return TableField(mesh, degree, div)


# -- solve --------------------------------------------------------------


@dataclass
class StokesSolution:
    """Velocity/pressure coefficients plus the mesh they live on.

    The stored ``pressure`` is the physical one (mean-zero); ``multiplier``
    is the mean-constraint multiplier, nonzero only for incompatible data.
    """

    mesh: object
    velocity: np.ndarray  # (n_p2, 2)
    pressure: np.ndarray  # (nv,) for p1, (nt, 3) for dp1
    pressure_space: str
    multiplier: float = 0.0
    residual: float = 0.0

    def pressure_mean(self):
        m = pressure_mean_row(self.mesh, self.pressure_space)
        return float(m @ self.pressure.ravel()) / self.mesh.area()

    # -- quadrature-table views ----------------------------------------

    def gradient_field(self, degree):
        """∇v_h as a (2, 2) table field: entry [c, d] = ∂_d v_c."""
        return velocity_gradient_table(self.mesh, self.velocity, degree)

    def velocity_field(self, degree):
        return velocity_value_table(self.mesh, self.velocity, degree)

    def divergence_field(self, degree):
        return velocity_divergence_table(self.mesh, self.velocity, degree)

    def pressure_field(self, degree):
        bary, _ = triangle_rule(degree)
        pmap = pressure_dof_map(self.mesh, self.pressure_space)
        pv = self.pressure.ravel()[pmap]  # (nt, 3)
        vals = np.einsum("tk,qk->tq", pv, bary)
        return TableField(self.mesh, degree, vals)


def solve(system: SaddleSystem) -> StokesSolution:
    """Direct factorization of the reduced symmetric saddle system.

    The mean-pressure constraint is handled outside the factored matrix:
    the constant-pressure left null vector determines the compatibility
    multiplier in closed form, one pressure unknown (and its then
    redundant constraint row) is pinned to zero, and the pressure is
    shifted to mean zero afterwards.  This avoids the catastrophic
    fill-in a dense bordering row causes in the sparse factorization and
    is algebraically identical to the bordered system.
    """
    mesh = system.mesh
    free = system.free
    nf = int(np.sum(free))
    np_ = len(system.Gdiv)
    vd = system.dirichlet_values.ravel()
    A_ff = system.A[free][:, free]
    B_f = system.B[:, free]
    rhs_v = system.F[free] - system.A[free][:, ~free] @ vd[~free]
    rhs_p = system.Gdiv - system.B[:, ~free] @ vd[~free]
    m = system.mean_row
    # interior test functions carry no boundary flux, so summing the
    # divergence rows isolates the multiplier of the mean row
    mu = float(np.sum(rhs_p)) / float(np.sum(m))
    rhs_p = rhs_p - mu * m
    if "lu" not in system._cache:
        keep = np.ones(np_, dtype=bool)
        keep[0] = False
        B_pin = B_f[keep].tocsr()
        K = sp.bmat([[A_ff, B_pin.T], [B_pin, None]], format="csc")
        try:
            system._cache["lu"] = spla.splu(K)
        except RuntimeError as exc:  # pragma: no cover - singular systems
            raise SolverError(
                f"saddle-point factorization failed: {exc}"
            ) from exc
        system._cache["K"] = K
    K = system._cache["K"]
    lu = system._cache["lu"]
    rhs = np.concatenate([rhs_v, rhs_p[1:]])
    x = lu.solve(rhs)
    # one step of iterative refinement recovers the accuracy the pinned
    # formulation loses to its larger condition number
    x = x - lu.solve(K @ x - rhs)
    if not np.all(np.isfinite(x)):
        raise SolverError("solver produced non-finite values")
    res = K @ x - rhs
    rel = float(np.linalg.norm(res)) / max(float(np.linalg.norm(rhs)), 1.0)
    if rel > 1e-9:
        raise SolverError(f"relative residual {rel:.2e} exceeds 1e-9")
    vel = vd.copy()
    vel[free] = x[:nf]
    phat = np.concatenate([[0.0], x[nf:]])
    phat = phat - float(m @ phat) / float(np.sum(m))
    pressure = -phat
    if system.pressure_space == "dp1":
        pressure = pressure.reshape(mesh.nt, 3)
    return StokesSolution(
        mesh=mesh,
        velocity=vel.reshape(mesh.n_p2, 2),
        pressure=pressure,
        pressure_space=system.pressure_space,
        multiplier=mu,
        residual=rel,
    )


def solve_prescribed_divergence(
    mesh,
    f,
    dirichlet=None,
    pressure_space="p1",
    quad_degree=ASSEMBLY_DEGREE,
):
    """Zero-source Stokes solve with prescribed divergence ``f``.

    With zero boundary data the returned velocity is a bounded right
    inverse of the divergence applied to ``f``.
    """
    system = assemble(
        mesh,
        rhs=None,
        div_data=f,
        dirichlet=dirichlet,
        pressure_space=pressure_space,
        quad_degree=quad_degree,
    )
    return solve(system)


# -- point evaluation ---------------------------------------------------


def locate_point(mesh, point, tol=1e-10):
    """Deterministic triangle lookup: lowest-index triangle containing point."""
    p = np.asarray(point, dtype=float)
    corners = mesh.vertices[mesh.triangles]
    v0 = corners[:, 0]
    J = np.stack([corners[:, 1] - v0, corners[:, 2] - v0], axis=2)
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    rel = p - v0
    u = (J[:, 1, 1] * rel[:, 0] - J[:, 0, 1] * rel[:, 1]) / det
    v = (-J[:, 1, 0] * rel[:, 0] + J[:, 0, 0] * rel[:, 1]) / det
    inside = (u >= -tol) & (v >= -tol) & (u + v <= 1 + tol)
    idx = np.flatnonzero(inside)
    if len(idx) == 0:
        raise FieldEvalError(f"point {tuple(p)} lies outside the mesh")
    t = int(idx[0])
    bary = np.array([1.0 - u[t] - v[t], u[t], v[t]])
    return t, bary


def evaluate_at(solution: StokesSolution, point):
    """Finite-element interpolation: returns (velocity 2-vector, pressure)."""
    mesh = solution.mesh
    t, bary = locate_point(mesh, point)
    N = p2_basis(bary[None, :])[0]
    vel = N @ solution.velocity[mesh.tri_p2()[t]]
    pmap = pressure_dof_map(mesh, solution.pressure_space)
    pres = float(bary @ solution.pressure.ravel()[pmap[t]])
    return vel, pres


# -- serialization ------------------------------------------------------


def save_solution(solution, path):
    mesh = solution.mesh
    lines = [
        f"stokes v1 {mesh.n_p2} {solution.pressure.size} "
        f"{solution.pressure_space} {mesh.checksum()}"
    ]
    for vx, vy in solution.velocity:
        lines.append(f"{float(vx)!r} {float(vy)!r}")
    for q in solution.pressure.ravel():
        lines.append(f"{float(q)!r}")
    lines.append(f"{float(solution.multiplier)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_solution(path, mesh):
    with open(path) as fh:
        header = fh.readline().split()
        if header[:2] != ["stokes", "v1"]:
            raise FieldEvalError("not a stokes v1 file")
        n_p2, npres = int(header[2]), int(header[3])
        pspace, checksum = header[4], header[5]
        if checksum != mesh.checksum():
            raise FieldEvalError("solution was computed on a different mesh")
        vel = np.array(
            [[float(v) for v in fh.readline().split()] for _ in range(n_p2)]
        )
        pres = np.array([float(fh.readline()) for _ in range(npres)])
        mult = float(fh.readline())
    if pspace == "dp1":
        pres = pres.reshape(mesh.nt, 3)
    return StokesSolution(
        mesh=mesh,
        velocity=vel,
        pressure=pres,
        pressure_space=pspace,
        multiplier=mult,
    )

"""Shrinking-hole sweeps: uniform bounds, blow-up, duality, and rescaling.

Each sweep solves the Stokes problem on a family of domains with a hole of
diameter proportional to ``epsilon``, measures norm ratios, and classifies
the trend as the hole shrinks.
"""

import dataclasses
from dataclasses import dataclass, field, replace

import numpy as np

from . import fem
from .errors import ConfigError, DegenerateSourceError, UndefinedRatioError
from .fields import CallableField, TableField, quadrature_weights
from .geometry import DomainSpec
from .mesh import mesh_graded_square, mesh_single_hole, rescale_mesh
from .norms import NORM_DEGREE, conjugate, estimate_ratio, lp_norm

__all__ = [
    "SweepRecord",
    "GrowthFit",
    "default_source",
    "offset_bump_source",
    "bump_force",
    "dipole_force",
    "fit_growth",
    "run_uniform_sweep",
    "verify_nondegenerate_center",
    "run_blowup_sweep",
    "construct_dual_source",
    "run_dual_blowup_sweep",
    "rescaling_consistency",
    "run_enlarging_domain_sweep",
]

#: relative band width under which the last sweep points count as bounded
BOUNDED_BAND = 1.2
#: minimal fitted log-log slope for a growth verdict
GROWTH_SLOPE = 0.05
#: number of trailing sweep points examined by the verdict rules
TREND_POINTS = 4


@dataclass
class SweepRecord:
    """One measured sweep point; field order matches the CSV schema."""

    epsilon: float
    p: float
    grad_lp: float
    pressure_lp: float
    source_lp: float
    ratio: float
    dofs: int
    seconds: float = 0.0


@dataclass
class GrowthFit:
    """Log-log trend of ratio against 1/epsilon."""

    slope: float
    residual: float
    verdict: str  # bounded | growing | inconclusive
    band: float = BOUNDED_BAND


def fit_growth(records, band=BOUNDED_BAND):
    """Classify the ratio trend over the trailing sweep points."""
    ratios = np.array([r.ratio for r in records])
    eps = np.array([r.epsilon for r in records])
    tail = ratios[-TREND_POINTS:]
    # ratios at rounding-noise level mean a zero solution, not a trend
    if np.all(ratios <= 1e-12):
        return GrowthFit(slope=0.0, residual=0.0, verdict="bounded", band=band)
    if np.any(ratios <= 0.0) or len(records) < 2:
        return GrowthFit(
            slope=float("nan"), residual=float("nan"),
            verdict="inconclusive", band=band,
        )
    x = np.log(1.0 / eps)
    y = np.log(ratios)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    growing = bool(np.all(np.diff(tail) > 0.0)) and slope > GROWTH_SLOPE
    bounded = float(np.max(tail) / np.min(tail)) <= band
    if growing:
        verdict = "growing"
    elif bounded:
        verdict = "bounded"
    else:
        verdict = "inconclusive"
    return GrowthFit(
        slope=float(slope), residual=residual, verdict=verdict, band=band
    )


# -- canonical sources --------------------------------------------------


def default_source():
    """Matrix source G(x) = x_1 I, a unit body force in the x direction."""

    def fn(pts):
        out = np.zeros((len(pts), 2, 2))
        out[:, 0, 0] = pts[:, 0]
        out[:, 1, 1] = pts[:, 0]
        return out

    return CallableField(fn, shape=(2, 2))


def offset_bump_source(center=(0.5, 0.3), width=0.5):
    """Matrix source whose divergence is a Gaussian push at ``center``.

    The force exp(-|x - c|^2 / w^2) e_1 is not a gradient and has no
    symmetry fixing the origin, so unlike :func:`default_source` it drives
    a flow with nonzero center velocity.
    """
    from scipy.special import erf

    c1, c2 = float(center[0]), float(center[1])
    w = float(width)

    def fn(pts):
        x, y = pts[:, 0], pts[:, 1]
        out = np.zeros((len(pts), 2, 2))
        out[:, 0, 0] = (
            0.5 * np.sqrt(np.pi) * w
            * erf((x - c1) / w)
            * np.exp(-(((y - c2) / w) ** 2))
        )
        return out

    return CallableField(fn, shape=(2, 2))


def bump_force(direction=(1.0, 0.0), radius=1.0):
    """Smooth force supported in the ball of the given radius about 0."""
    direction = np.asarray(direction, dtype=float)

    def fn(pts):
        r2 = np.sum(pts * pts, axis=1) / radius**2
        amp = np.zeros(len(pts))
        inside = r2 < 1.0
        amp[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return amp[:, None] * direction

    return CallableField(fn, shape=(2,))


def dipole_force(offset=0.45, radius=0.45):
    """Two opposing bumps in the unit ball with zero net force.

    On growing two-dimensional domains a force with nonzero mean drives a
    logarithmically growing energy (the classical large-domain paradox),
    so bounded-band experiments need the balanced variant.
    """
    up = bump_force((1.0, 0.0), radius)
    down = bump_force((-1.0, 0.0), radius)
    shift = np.array([0.0, float(offset)])

    def fn(pts):
        return up(pts - shift) + down(pts + shift)

    return CallableField(fn, shape=(2,))


# -- shared plumbing ----------------------------------------------------


def _validate_eps(eps_list):
    eps = [float(e) for e in eps_list]
    if not eps:
        raise ConfigError("epsilon list must not be empty")
    if any(not 0.0 < e < 1.0 for e in eps):
        raise ConfigError("every epsilon must lie in (0, 1)")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("epsilon list must be strictly decreasing")
    return eps


def _dof_count(solution):
    return 2 * solution.mesh.n_p2 + solution.pressure.size + 1


def _record(solution, G_report_field, p, degree=NORM_DEGREE):
    mesh = solution.mesh
    grad = lp_norm(solution.gradient_field(degree), mesh, p, degree)
    pres = lp_norm(solution.pressure_field(degree), mesh, p, degree)
    src = lp_norm(G_report_field, mesh, p, degree)
    num = dataclasses.replace(grad, value=grad.value + pres.value)
    return SweepRecord(
        epsilon=0.0,
        p=p,
        grad_lp=grad.value,
        pressure_lp=pres.value,
        source_lp=src.value,
        ratio=estimate_ratio(num, src),
        dofs=_dof_count(solution),
    )


def _solve_single_hole(spec, G, h_far, n_hole, quad_degree=fem.ASSEMBLY_DEGREE):
    mesh = mesh_single_hole(spec, h_far=h_far, n_hole=n_hole)
    system = fem.assemble(mesh, rhs=fem.DivForm(G), quad_degree=quad_degree)
    return fem.solve(system)


# -- uniform estimate sweep ---------------------------------------------


def run_uniform_sweep(
    G, p, eps_list, spec=None, h_far=0.4, n_hole=32
):
    """Per-epsilon norm ratios for the shrinking-hole Dirichlet problem."""
    eps_list = _validate_eps(eps_list)
    if spec is None:
        spec = DomainSpec()
    records = []
    for eps in eps_list:
        sol = _solve_single_hole(replace(spec, epsilon=eps), G, h_far, n_hole)
        rec = _record(sol, G, p)
        rec.epsilon = eps
        records.append(rec)
    return records, fit_growth(records)


# -- center certification -----------------------------------------------


def verify_nondegenerate_center(G, L=2.0, h_center=0.08, h_far=0.4):
    """Reference solve without a hole; certifies the velocity at the origin.

    Returns ``(magnitude, error_bar)`` where the error bar is the change
    under one refinement; refuses sources whose flow vanishes at 0.
    """
    coarse = mesh_graded_square(L, h_center, h_far)
    fine = mesh_graded_square(L, 0.5 * h_center, 0.5 * h_far)
    vals = []
    for mesh in (coarse, fine):
        sol = fem.solve(fem.assemble(mesh, rhs=fem.DivForm(G)))
        vel, _ = fem.evaluate_at(sol, (0.0, 0.0))
        vals.append(vel)
    magnitude = float(np.linalg.norm(vals[1]))
    error_bar = float(np.linalg.norm(vals[1] - vals[0]))
    if magnitude <= 10.0 * max(error_bar, 1e-14):
        raise DegenerateSourceError(
            f"center velocity {magnitude:.3e} is not separated from the "
            f"refinement error bar {error_bar:.3e}"
        )
    return magnitude, error_bar


# -- blow-up sweeps -----------------------------------------------------


def run_blowup_sweep(
    G, p, eps_list, spec=None, h_far=0.4, n_hole=32, certify_center=True
):
    """Growth of the gradient p-norm ratio for p above the dimension."""
    if not float(p) > 2.0:
        raise ConfigError(f"blow-up sweep requires p > d = 2, got {p}")
    if certify_center:
        verify_nondegenerate_center(G)
    return run_uniform_sweep(G, p, eps_list, spec=spec, h_far=h_far, n_hole=n_hole)


def construct_dual_source(solution, p, degree=NORM_DEGREE):
    """Normalized conjugate-power gradient table H with unit p-norm.

    H = |grad v|^(p'-2) grad v / ||grad v||_{p'}^{p'/p}; the duality
    pairing of H with grad v then equals the p'-norm of grad v.
    """
    q = conjugate(p)
    grad = solution.gradient_field(degree)
    gnorm = lp_norm(grad, solution.mesh, q, degree).value
    if gnorm == 0.0:
        raise UndefinedRatioError("cannot normalize a zero gradient")
    vals = grad.values
    mag = np.sqrt(np.sum(vals * vals, axis=(2, 3)))
    H = np.where(mag > 0.0, mag, 1.0)[:, :, None, None] ** (q - 2.0) * vals
    H *= np.where(mag > 0.0, 1.0, 0.0)[:, :, None, None]
    H /= gnorm ** (q / p)
    return TableField(solution.mesh, degree, H)


@dataclass
class DualDiagnostics:
    """Per-epsilon checks behind the duality transfer argument."""

    h_norm: float  # ||H||_p, must be 1
    duality_gap: float  # relative error of <H, grad v> against ||grad v||_p'
    lower_bound_margin: float  # ||grad w||_p / (||grad v||_p' / ||G||_p')


def run_dual_blowup_sweep(
    G, p, eps_list, spec=None, h_far=0.4, n_hole=32, certify_center=True
):
    """Duality transfer: blow-up below the conjugate dimension.

    Solves with the base source at each epsilon, builds the normalized
    dual source from that solution, and re-solves with it; returns
    ``(records, fit, diagnostics)``.
    """
    p = float(p)
    if not 1.0 < p < 2.0:
        raise ConfigError(f"dual sweep requires 1 < p < d' = 2, got {p}")
    eps_list = _validate_eps(eps_list)
    q = conjugate(p)
    if certify_center:
        verify_nondegenerate_center(G)
    if spec is None:
        spec = DomainSpec()
    degree = NORM_DEGREE
    records, diagnostics = [], []
    for eps in eps_list:
        # the dual-source table must enter assembly at its own degree so
        # the discrete duality identity is exact
        sol_v = _solve_single_hole(
            replace(spec, epsilon=eps), G, h_far, n_hole, quad_degree=degree
        )
        mesh = sol_v.mesh
        H = construct_dual_source(sol_v, p, degree)
        sol_w = fem.solve(
            fem.assemble(mesh, rhs=fem.DivForm(H), quad_degree=degree)
        )
        rec = _record(sol_w, H, p, degree)
        rec.epsilon = eps
        records.append(rec)
        W = quadrature_weights(mesh, degree)
        pairing = float(
            np.sum(W[..., None, None] * H.values * sol_v.gradient_field(degree).values)
        )
        gv = lp_norm(sol_v.gradient_field(degree), mesh, q, degree).value
        gw = lp_norm(sol_w.gradient_field(degree), mesh, p, degree).value
        gnormq = lp_norm(G, mesh, q, degree).value
        diagnostics.append(
            DualDiagnostics(
                h_norm=lp_norm(H, mesh, p, degree).value,
                duality_gap=abs(pairing - gv) / gv,
                lower_bound_margin=gw / (gv / gnormq),
            )
        )
    return records, fit_growth(records), diagnostics


# -- rescaling equivalence ----------------------------------------------


@dataclass
class RescalingCheck:
    ratio_discrepancy: float
    norm_discrepancy: float


def rescaling_consistency(spec, G, p, h_far=0.4, n_hole=32):
    """Solve on the domain and on its 1/epsilon dilation; compare.

    The dilated problem uses the source x -> eps G(eps x); the two
    discrete systems share combinatorics, so ratios agree to rounding and
    the gradient norms differ by the exact factor eps^(1 - d/p).
    """
    eps = spec.epsilon
    small = mesh_single_hole(spec, h_far=h_far, n_hole=n_hole)
    big = rescale_mesh(small, 1.0 / eps)

    def g1(pts):
        return eps * G(eps * pts)

    G1 = CallableField(g1, shape=(2, 2))
    sol = fem.solve(fem.assemble(small, rhs=fem.DivForm(G)))
    sol1 = fem.solve(fem.assemble(big, rhs=fem.DivForm(G1)))
    r = _record(sol, G, p)
    r1 = _record(sol1, G1, p)
    ratio_disc = abs(r.ratio - r1.ratio) / r.ratio
    # the dilated gradient norm is eps^(1 - d/p) times the original one
    expect = eps ** (1.0 - 2.0 / p) * r.grad_lp
    norm_disc = abs(r1.grad_lp - expect) / expect
    return RescalingCheck(
        ratio_discrepancy=ratio_disc, norm_discrepancy=norm_disc
    )


# -- enlarging-domain sweep ---------------------------------------------


def run_enlarging_domain_sweep(
    g, p, eps_list, L=2.0, support_radius=1.0, h_center=0.15
):
    """Body-force solves on the dilated domain Omega/eps without a hole.

    The force must be supported in the unit ball so the data do not move
    with the dilation; the combined gradient and pressure norm should stay
    in a fixed band as the domain grows.
    """
    if support_radius > 1.0:
        raise ConfigError(
            f"force support radius {support_radius} exceeds the unit ball"
        )
    eps_list = _validate_eps(eps_list)
    records = []
    for eps in eps_list:
        half = L / eps
        mesh = mesh_graded_square(half, h_center, half / 4.0)
        sol = fem.solve(fem.assemble(mesh, rhs=fem.BodyForce(g)))
        grad = lp_norm(sol.gradient_field(NORM_DEGREE), mesh, p)
        pres = lp_norm(sol.pressure_field(NORM_DEGREE), mesh, p)
        src = lp_norm(g, mesh, p)
        total = grad.value + pres.value
        records.append(
            SweepRecord(
                epsilon=eps,
                p=float(p),
                grad_lp=grad.value,
                pressure_lp=pres.value,
                source_lp=src.value,
                ratio=total if src.value == 0.0 else total / src.value,
                dofs=_dof_count(sol),
            )
        )
    return records, fit_growth(records)

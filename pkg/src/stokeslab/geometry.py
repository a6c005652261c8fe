"""Domain descriptions: model holes and single-hole domains.

The model hole is given in normalized coordinates (centered at the origin,
contained in the ball of radius 1/2).  Concrete holes are obtained by
scaling, rotating and translating its boundary polygon.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpecError

__all__ = ["HoleShape", "DomainSpec", "PerforatedDomain", "build_perforated"]


def _rot(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def _segments_intersect(p1, p2, p3, p4):
    def orient(a, b, c):
        u, v = b - a, c - a
        return np.sign(u[0] * v[1] - u[1] * v[0])

    return (
        orient(p1, p2, p3) * orient(p1, p2, p4) < 0
        and orient(p3, p4, p1) * orient(p3, p4, p2) < 0
    )


@dataclass
class HoleShape:
    """Normalized model hole: a disk, a square, or a simple polygon.

    ``size`` is the disk radius or the square half-side; for polygons the
    vertex list is taken literally and ``size`` is ignored.
    """

    kind: str = "disk"
    size: float = 0.25
    orientation: float = 0.0
    vertices: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("disk", "square", "polygon"):
            raise InvalidSpecError(f"unknown hole kind {self.kind!r}")
        if self.kind in ("disk", "square"):
            if not self.size > 0:
                raise InvalidSpecError("hole size must be positive")
        else:
            v = np.asarray(self.vertices, dtype=float)
            if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
                raise InvalidSpecError("polygon hole needs >= 3 2D vertices")
            area2 = float(
                np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
            )
            if area2 <= 0:
                raise InvalidSpecError("polygon hole must be positively oriented")
            m = len(v)
            for i in range(m):
                for j in range(i + 1, m):
                    if j in (i, (i + 1) % m) or (j + 1) % m == i:
                        continue
                    if _segments_intersect(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m]):
                        raise InvalidSpecError("polygon hole is self-intersecting")
            self.vertices = v
        if self.max_radius() > 0.5 + 1e-12:
            raise InvalidSpecError(
                "normalized hole must be contained in the ball of radius 1/2"
            )

    def max_radius(self):
        """Radius of the smallest origin-centered disk containing the hole."""
        if self.kind == "disk":
            return self.size
        if self.kind == "square":
            return self.size * np.sqrt(2.0)
        return float(np.max(np.hypot(self.vertices[:, 0], self.vertices[:, 1])))

    def boundary_points(self, n):
        """``n`` points tracing the normalized boundary counterclockwise.

        The traversal starts near angle ``orientation`` and the returned
        points include every polygon corner (``n`` must allow it).
        """
        if self.kind == "disk":
            th = self.orientation + 2.0 * np.pi * np.arange(n) / n
            return self.size * np.column_stack([np.cos(th), np.sin(th)])
        if self.kind == "square":
            if n % 4 != 0:
                raise InvalidSpecError("square hole needs n divisible by 4")
            s = self.size
            corners = np.array([[s, s], [-s, s], [-s, -s], [s, -s]])
            pts = self._trace(np.vstack([corners, corners[:1]]), n)
        else:
            v = self.vertices
            if n < len(v):
                raise InvalidSpecError(
                    f"polygon hole with {len(v)} corners needs n >= {len(v)}"
                )
            pts = self._trace(np.vstack([v, v[:1]]), n)
        return pts @ _rot(self.orientation).T

    @staticmethod
    def _trace(closed, n):
        """Distribute n points on a closed polyline, keeping its corners."""
        seg = np.diff(closed, axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        m = len(lengths)
        counts = np.ones(m, dtype=int)
        extra = n - m
        if extra > 0:
            # largest-remainder allocation of the extra points by length
            quota = lengths / lengths.sum() * extra
            counts += np.floor(quota).astype(int)
            rem = quota - np.floor(quota)
            short = extra - int(np.sum(np.floor(quota)))
            if short > 0:
                order = np.lexsort((np.arange(m), -rem))
                counts[order[:short]] += 1
        pts = []
        for i in range(m):
            t = np.arange(counts[i]) / counts[i]
            pts.append(closed[i] + t[:, None] * seg[i])
        return np.vstack(pts)


@dataclass
class DomainSpec:
    """Single-hole domain: outer square or disk of extent ``L`` minus the
    ``epsilon``-scaled model hole, both centered at the origin."""

    outer: str = "square"
    L: float = 2.0
    hole: HoleShape = field(default_factory=HoleShape)
    epsilon: float = 0.5
    dim: int = 2

    def __post_init__(self):
        if self.outer not in ("square", "disk"):
            raise InvalidSpecError(f"unknown outer kind {self.outer!r}")
        if self.L < 1.0:
            raise InvalidSpecError("outer domain must contain the unit ball (L >= 1)")
        if not 0.0 < self.epsilon < 1.0:
            raise InvalidSpecError("epsilon must lie in (0, 1)")
        if self.epsilon * self.hole.max_radius() >= 0.5:
            raise InvalidSpecError(
                "scaled hole closure must stay inside the ball of radius 1/2"
            )
        if self.dim != 2:
            raise InvalidSpecError("only d = 2 is executable")

    def hole_boundary(self, n_hole):
        return self.epsilon * self.hole.boundary_points(n_hole)

    def hole_radius(self):
        return self.epsilon * self.hole.max_radius()

    def outer_radius(self, theta):
        """Distance from the origin to the outer boundary along angle theta."""
        if self.outer == "disk":
            return np.full_like(np.asarray(theta, dtype=float), self.L)
        theta = np.asarray(theta, dtype=float)
        return self.L / np.maximum(np.abs(np.cos(theta)), np.abs(np.sin(theta)))

    def area(self):
        outer = (2.0 * self.L) ** 2 if self.outer == "square" else np.pi * self.L**2
        return outer  # hole area subtracted by the mesh-level accounting


@dataclass
class PerforatedDomain:
    """Square domain tiled by n-by-n periodic cells, one hole per cell.

    The cell size is ``epsilon = side / n``.  Each cell carries a hole:
    the model hole scaled by ``epsilon**alpha`` and rotated by its cell
    angle, centered at the cell center, strictly inside the ball of
    radius ``b1 * epsilon`` which in turn sits strictly inside the cell
    inset by ``delta * epsilon``.
    """

    side: float
    n: int
    alpha: float
    hole: HoleShape
    b1: float
    delta: float
    angles: np.ndarray = field(repr=False)

    @property
    def epsilon(self):
        return self.side / self.n

    @property
    def n_cells(self):
        return self.n * self.n

    def cell_index(self, i, j):
        return i * self.n + j

    def cell_of(self, k):
        return divmod(k, self.n)

    def grid_line(self, i):
        """i-th grid coordinate; exact and shared between neighbor cells."""
        return i * self.epsilon

    def center(self, k):
        i, j = self.cell_of(k)
        eps = self.epsilon
        return np.array([(i + 0.5) * eps, (j + 0.5) * eps])

    def hole_scale(self):
        return self.epsilon**self.alpha

    def ball_radius(self):
        return self.b1 * self.epsilon

    def hole_boundary(self, k, n_hole):
        i, j = self.cell_of(k)
        pts = self.hole.boundary_points(n_hole) @ _rot(self.angles[i, j]).T
        return self.center(k) + self.hole_scale() * pts


def build_perforated(side, n, alpha, hole=None, b1=0.375, delta=0.0625, seed=None):
    """Validated perforated-domain description.

    ``seed`` draws per-cell hole rotations; None keeps them all zero for
    reproducible reference artifacts.
    """
    if not side > 0:
        raise InvalidSpecError("domain side must be positive")
    if not (isinstance(n, int) and n >= 1):
        raise InvalidSpecError("cell count per axis must be a positive integer")
    if not alpha >= 1.0:
        raise InvalidSpecError("hole-size exponent alpha must be at least 1")
    if hole is None:
        hole = HoleShape()
    if not 0.0 < delta < 0.25:
        raise InvalidSpecError("cell inset delta must lie in (0, 1/4)")
    if not 0.0 < b1 <= 0.5 - delta:
        raise InvalidSpecError(
            f"ball factor {b1} exceeds the inset half-cell {0.5 - delta}"
        )
    if seed is None:
        angles = np.zeros((n, n))
    else:
        angles = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, (n, n))
    pd = PerforatedDomain(
        side=float(side), n=n, alpha=float(alpha), hole=hole,
        b1=float(b1), delta=float(delta), angles=angles,
    )
    limit = 0.85 * pd.ball_radius()
    for k in range(pd.n_cells):
        if pd.hole_scale() * hole.max_radius() > limit:
            raise InvalidSpecError(
                f"cell {k}: scaled hole radius "
                f"{pd.hole_scale() * hole.max_radius():.3e} does not fit "
                f"strictly inside the ball radius {pd.ball_radius():.3e}"
            )
    return pd

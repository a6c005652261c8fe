"""Scalar, vector, and matrix-valued data sampled at quadrature points.

A field is either closed-form (a callable evaluable anywhere) or a table of
values bound to one mesh and quadrature degree.  Everything downstream
(assembly, norms) consumes fields through :meth:`Field.sample`.
"""

import numpy as np

from .errors import FieldEvalError
from .quadrature import triangle_rule

__all__ = [
    "Field",
    "CallableField",
    "TableField",
    "constant_field",
    "quadrature_points",
    "quadrature_weights",
]


def quadrature_points(mesh, degree):
    """Physical quadrature points, shape (nt, nq, 2)."""
    bary, _ = triangle_rule(degree)
    corners = mesh.vertices[mesh.triangles]  # (nt, 3, 2)
    return np.einsum("qk,tkd->tqd", bary, corners)


def quadrature_weights(mesh, degree):
    """Physical quadrature weights, shape (nt, nq): area times rule weight."""
    _, w = triangle_rule(degree)
    return mesh.signed_areas()[:, None] * w[None, :]


class Field:
    """Base class; ``shape`` is () for scalars, (2,) vectors, (2,2) matrices."""

    shape = ()

    def sample(self, mesh, degree):
        """Values at the quadrature points of ``mesh``: (nt, nq, *shape)."""
        raise NotImplementedError

    def __call__(self, points):
        raise FieldEvalError(
            f"{type(self).__name__} is not evaluable at arbitrary points"
        )


class CallableField(Field):
    """Closed-form field: ``fn`` maps an (n, 2) point array to (n, *shape)."""

    def __init__(self, fn, shape=()):
        self.fn = fn
        self.shape = tuple(shape)

    def __call__(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.asarray(self.fn(points), dtype=float)
        want = (len(points),) + self.shape
        if out.shape != want:
            raise FieldEvalError(
                f"field evaluator returned shape {out.shape}, expected {want}"
            )
        return out

    def sample(self, mesh, degree):
        qp = quadrature_points(mesh, degree)
        nt, nq, _ = qp.shape
        vals = self(qp.reshape(nt * nq, 2))
        return vals.reshape((nt, nq) + self.shape)


class TableField(Field):
    """Quadrature-point table bound to one mesh and degree."""

    def __init__(self, mesh, degree, values):
        values = np.asarray(values, dtype=float)
        bary, _ = triangle_rule(degree)
        if values.shape[:2] != (mesh.nt, len(bary)):
            raise FieldEvalError(
                "table shape does not match the mesh/degree quadrature layout"
            )
        self.mesh = mesh
        self.degree = degree
        self.values = values
        self.shape = values.shape[2:]

    def sample(self, mesh, degree):
        if mesh is not self.mesh or degree != self.degree:
            raise FieldEvalError(
                "table field is bound to a different mesh or quadrature degree"
            )
        return self.values


def constant_field(value):
    value = np.asarray(value, dtype=float)

    def fn(points):
        return np.broadcast_to(value, (len(points),) + value.shape).copy()

    return CallableField(fn, shape=value.shape)

"""Lebesgue exponent arithmetic and quadrature-based integral norms."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, FieldEvalError, UndefinedRatioError
from .fields import quadrature_weights
from .quadrature import TRIANGLE_DEGREES

__all__ = [
    "conjugate",
    "sobolev_star",
    "NormReport",
    "lp_norm",
    "estimate_ratio",
]

#: default quadrature degree for |f|^p integrands (non-polynomial for odd p)
NORM_DEGREE = 6


def conjugate(p):
    """Holder conjugate p/(p-1)."""
    p = float(p)
    if not p > 1.0:
        raise ConfigError(f"conjugate exponent requires p > 1, got {p}")
    return p / (p - 1.0)


def sobolev_star(p, d=2):
    """Critical embedding exponent dp/(d-p); only defined for p < d."""
    p = float(p)
    if not p >= 1.0:
        raise ConfigError(f"exponent must satisfy p >= 1, got {p}")
    if p >= d:
        raise ConfigError(
            f"critical exponent undefined for p = {p} >= dimension {d}"
        )
    return d * p / (d - p)


@dataclass
class NormReport:
    """Norm value plus a two-rule quadrature error estimate.

    ``error_estimate`` is None when the field cannot be resampled at a
    finer rule (table fields are bound to one layout).
    """

    value: float
    p: float
    error_estimate: float = None

    @property
    def flagged(self):
        """True when the quadrature estimate exceeds 1% of the value."""
        if self.error_estimate is None:
            return False
        return self.error_estimate > 0.01 * max(self.value, 1e-300)


def _pointwise_magnitude(values):
    """Euclidean magnitude over the trailing component axes: (nt, nq)."""
    flat = values.reshape(values.shape[:2] + (-1,))
    return np.sqrt(np.sum(flat * flat, axis=-1))


def _raw_norm(field, mesh, p, degree, region_mask):
    W = quadrature_weights(mesh, degree)
    mag = _pointwise_magnitude(field.sample(mesh, degree))
    if region_mask is not None:
        region_mask = np.asarray(region_mask, dtype=bool)
        if region_mask.shape != (mesh.nt,):
            raise ConfigError("region mask must have one entry per triangle")
        W = W[region_mask]
        mag = mag[region_mask]
    return float(np.sum(W * mag**p) ** (1.0 / p))


def lp_norm(field, mesh, p, degree=NORM_DEGREE, region_mask=None):
    """Integral p-norm of a field over ``mesh`` (or a triangle subset).

    Vector and matrix fields use the pointwise Euclidean (Frobenius)
    magnitude.  The error estimate compares against the next finer
    quadrature rule when the field supports resampling.
    """
    p = float(p)
    if not p >= 1.0:
        raise ConfigError(f"norm exponent must satisfy p >= 1, got {p}")
    value = _raw_norm(field, mesh, p, degree, region_mask)
    finer = [d for d in TRIANGLE_DEGREES if d > degree]
    estimate = None
    if finer:
        try:
            refined = _raw_norm(field, mesh, p, finer[0], region_mask)
            estimate = abs(refined - value)
        except FieldEvalError:
            estimate = None
    return NormReport(value=value, p=p, error_estimate=estimate)


def estimate_ratio(numerator: NormReport, denominator: NormReport):
    """Quotient of two norm reports; refuses a zero denominator."""
    if denominator.value == 0.0:
        raise UndefinedRatioError("ratio against a zero-norm quantity")
    return numerator.value / denominator.value

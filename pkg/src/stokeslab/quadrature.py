"""Quadrature rules on the reference triangle and on edges.

Triangle rules are symmetric Gauss (Dunavant) rules given in barycentric
coordinates with weights summing to 1; multiply by the physical triangle
area to integrate.
"""

import numpy as np

__all__ = ["triangle_rule", "edge_rule", "TRIANGLE_DEGREES"]


def _perm3(a):
    """The three cyclic placements of the barycentric point (1-2a, a, a)."""
    c = 1.0 - 2.0 * a
    return [(c, a, a), (a, c, a), (a, a, c)]


def _perm6(a, b):
    c = 1.0 - a - b
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


def _build(points_weights):
    bary = []
    w = []
    for pts, wt in points_weights:
        for p in pts:
            bary.append(p)
            w.append(wt)
    bary = np.asarray(bary, dtype=float)
    w = np.asarray(w, dtype=float)
    # normalize away table truncation so constants integrate exactly
    w = w / w.sum()
    return bary, w


_RULES = {}

_RULES[1] = _build([([(1 / 3, 1 / 3, 1 / 3)], 1.0)])

_RULES[2] = _build([(_perm3(1 / 6), 1 / 3)])

_RULES[3] = _build(
    [
        ([(1 / 3, 1 / 3, 1 / 3)], -0.5625),
        (_perm3(0.2), 0.5208333333333333),
    ]
)

_RULES[4] = _build(
    [
        (_perm3(0.445948490915965), 0.223381589678011),
        (_perm3(0.091576213509771), 0.109951743655322),
    ]
)

_RULES[6] = _build(
    [
        (_perm3(0.063089014491502), 0.050844906370207),
        (_perm3(0.249286745170910), 0.116786275726379),
        (_perm6(0.310352451033785, 0.053145049844816), 0.082851075618374),
    ]
)

_RULES[8] = _build(
    [
        ([(1 / 3, 1 / 3, 1 / 3)], 0.144315607677787),
        (_perm3(0.459292588292723), 0.095091634413245),
        (_perm3(0.170569307751760), 0.103217370534712),
        (_perm3(0.050547228317031), 0.032458497623198),
        (_perm6(0.263112829634638, 0.008394777409958), 0.027230314174435),
    ]
)

_DEGREES = sorted(_RULES)

#: degrees with a dedicated tabulated rule
TRIANGLE_DEGREES = tuple(_DEGREES)


def triangle_rule(degree):
    """Return ``(bary, weights)`` exact for polynomials of the given degree.

    ``bary`` has shape (nq, 3), ``weights`` (nq,) summing to 1.
    """
    for d in _DEGREES:
        if d >= degree:
            return _RULES[d]
    return _RULES[_DEGREES[-1]]


def edge_rule(degree):
    """Gauss-Legendre rule on [0, 1]: returns ``(points, weights)``."""
    n = max(1, (degree + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w

"""stokeslab: a numerical laboratory for Stokes flow in domains with
shrinking holes.

Subpackages cover mesh generation for single-hole and periodically
perforated domains, a mixed finite-element Stokes solver, L^p norm
utilities, shrinking-hole scaling experiments, and the restriction /
divergence-inverse operators built from cell-local solves.
"""

__version__ = "0.1.0"

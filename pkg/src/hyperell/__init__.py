"""Exact experiments on quadratic character L-series over F_q[t].

The package computes, for an odd prime q, the L-polynomials attached to
quadratic characters chi_D with monic squarefree modulus D, their exact
values at s=1, the class-number invariants they encode, ensemble
statistics over all D of fixed degree, a probabilistic Euler-product
model, and resonator-weighted averages that witness extreme values.
"""

__version__ = "0.1.0"

from hyperell.gf import GF, GFPolyRing, FactoredPoly, GFError

__all__ = ["GF", "GFPolyRing", "FactoredPoly", "GFError", "__version__"]

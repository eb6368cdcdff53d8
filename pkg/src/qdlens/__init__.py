"""Quadrature-domain geometry and the anti-holomorphic lens equation r(z) = conj(z).

Subpackages:
  ratfun     polynomial / rational arithmetic, roots, duality involution
  lenssolve  fixed points of conj(r), Lefschetz counting, lens configurations
  curvegeo   boundary-curve singularity and curvature analysis
  quadcheck  Schwarz-function extraction and the quadrature identity
  inscribe   inscribed cardioid / circle constructions
  suffridge  extreme univalent (Laurent) polynomial catalog and search
  construct  nested inscriptions realizing the sharp connectivity counts
"""

from .ratfun import ComplexPoly, RationalMap, all_roots, dualize, is_self_dual

__version__ = "0.1.0"

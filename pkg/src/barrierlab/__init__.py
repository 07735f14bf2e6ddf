"""Numerical laboratory for barrier constructions in doubly degenerate
parabolic equations with exponentially growing weights.

Subpackages follow the pipeline:

* ``weights``   admissible exponents g and the doubling condition
* ``envelope``  derived calculus G, G^(-1), J, E, I and the sandwich lemmas
* ``barriers``  certified super/subsolution constant selection
* ``residual``  pointwise certification of the differential inequalities
* ``solver``    explicit finite-volume runs, decay/support/comparison
* ``transform`` change of variables to the inhomogeneous-density equation
* ``cli``       the ``barrierlab`` command

The hot kernels (time stepping, blow-up ODE) run compiled when the
Cython extension is built; ``barrierlab.BACKEND`` names the active side.
"""
from ._native import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]

"""
sobolevlab - Numerical laboratory for sharp potential-type L2-Sobolev
inequalities on Riemannian manifolds

Best first and second constants, extremal maps, a constrained minimizer and
concentration diagnostics for vector-valued maps U: M -> R^k.
"""

from .lib import (
    LOG,
    __version__,
    a0Euclidean_compute,
    a0Vector_compute,
    b0Bounds_assemble,
    dichotomy_classify,
    directionSphere_maximize,
    lqPotential_make,
    problem_minimize,
    radialGrid_make,
    state_connectToLogger,
)

__all__ = [
    "a0Euclidean_compute",
    "a0Vector_compute",
    "b0Bounds_assemble",
    "dichotomy_classify",
    "directionSphere_maximize",
    "lqPotential_make",
    "problem_minimize",
    "radialGrid_make",
    "LOG",
    "state_connectToLogger",
    "__version__",
]

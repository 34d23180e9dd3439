"""
sobolevlab - Numerical laboratory for sharp potential-type L2-Sobolev
inequalities on Riemannian manifolds
"""

__version__ = "0.4.0"

from .constants import (
    a0Euclidean_compute,
    a0Vector_compute,
    b0Bounds_assemble,
    dichotomy_classify,
)
from .log import LOG, state_connectToLogger
from .manifolds import radialGrid_make
from .potentials import directionSphere_maximize, lqPotential_make
from .solver import problem_minimize

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

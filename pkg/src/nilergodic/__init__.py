"""Multiple ergodic averages on the nilmanifold U_n / U_n(Z).

Exact arithmetic over rationals and square roots, the unitriangular group and
its lattice quotient, the Leibman group of polynomial sequences, ergodicity
of nil-translations via the maximal torus, and numerical comparison of
non-conventional averages with their limit integral.
"""

__version__ = "0.1.0"

from .scalars import ModeError, Radical, parse_scalar, sqrt
from .group import GroupElement, commutator, lcs_degree
from .nilmanifold import TestFunction, cube_integral, haar_sample, reduce
from .leibman import TildeElement, poly_seq_eval, star
from .ergodicity import green_ergodic_Sx, green_ergodic_T, is_ergodic_rotation
from .experiments import ExperimentConfig, compare, limit_integral, nonconventional_average

__all__ = [
    "__version__",
    "ModeError",
    "Radical",
    "parse_scalar",
    "sqrt",
    "GroupElement",
    "commutator",
    "lcs_degree",
    "TestFunction",
    "cube_integral",
    "haar_sample",
    "reduce",
    "TildeElement",
    "poly_seq_eval",
    "star",
    "green_ergodic_T",
    "green_ergodic_Sx",
    "is_ergodic_rotation",
    "ExperimentConfig",
    "compare",
    "limit_integral",
    "nonconventional_average",
]

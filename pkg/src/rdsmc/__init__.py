"""Finite-state random dynamical systems and Markov chain analysis.

Converts between RDS map measures and transition matrices, computes
stationary distributions through spanning-tree weights, decomposes
trajectories into cycles, evaluates entropy and entropy-production
functionals, and validates the analytic formulas against brute-force and
simulation oracles.
"""

__version__ = "0.1.0"

from .core import (
    EPS_ALG,
    EPS_SUM,
    AttractorInfo,
    CoalescenceError,
    CrossCheckError,
    DeterministicMap,
    DimensionMismatchError,
    EnumerationCapError,
    RdsmcError,
    ReducibleChainError,
    StochasticMatrix,
    SupportAsymmetryError,
    Tolerances,
    ValidationError,
    compose_maps,
    dump_map,
    dump_matrix,
    load_map,
    load_matrix,
    map_attractor,
    map_to_matrix,
    point_mass,
    prob_vector,
    uniform_vector,
)
from .kernels import BACKEND as KERNEL_BACKEND

__all__ = [
    "EPS_ALG",
    "EPS_SUM",
    "AttractorInfo",
    "CoalescenceError",
    "CrossCheckError",
    "DeterministicMap",
    "DimensionMismatchError",
    "EnumerationCapError",
    "KERNEL_BACKEND",
    "RdsmcError",
    "ReducibleChainError",
    "StochasticMatrix",
    "SupportAsymmetryError",
    "Tolerances",
    "ValidationError",
    "compose_maps",
    "dump_map",
    "dump_matrix",
    "load_map",
    "load_matrix",
    "map_attractor",
    "map_to_matrix",
    "point_mass",
    "prob_vector",
    "uniform_vector",
    "__version__",
]

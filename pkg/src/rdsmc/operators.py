"""Stochastic Perron-Frobenius / Koopman operator pair of a chain.

The push-forward family acts on row distributions (v -> v M^t), the Koopman
family on observables (u -> M^t u); the two are adjoint under the standard
inner product.  Powers are taken by repeated multiplication so the semigroup
property holds to rounding, with no spectral shortcuts.
"""

from __future__ import annotations

import numpy as np

from .core import (
    DimensionMismatchError,
    StochasticMatrix,
    ValidationError,
    as_stochastic,
    prob_vector,
)


def _power(m: StochasticMatrix, t: int) -> np.ndarray:
    if t < 0:
        raise ValidationError("time must be a non-negative integer")
    out = np.eye(m.n)
    for _ in range(t):
        out = out @ m.m
    return out


def pf_apply(m, v, t: int) -> np.ndarray:
    """Push a distribution forward t steps: v M^t.  Preserves the simplex."""
    m = as_stochastic(m)
    v = prob_vector(v)
    if len(v) != m.n:
        raise DimensionMismatchError("vector and matrix dimensions differ")
    return prob_vector(v @ _power(m, t))


def koopman_apply(m, u, t: int) -> np.ndarray:
    """Pull an observable back t steps: M^t u.  Fixes constant vectors."""
    m = as_stochastic(m)
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (m.n,):
        raise DimensionMismatchError("vector and matrix dimensions differ")
    return _power(m, t) @ u


def check_adjoint(m, v, u, t: int) -> float:
    """Adjointness defect |<v M^t, u> - <v, M^t u>|; bounded by rounding."""
    m = as_stochastic(m)
    left = float(np.dot(pf_apply(m, v, t), np.asarray(u, dtype=np.float64)))
    right = float(np.dot(prob_vector(v), koopman_apply(m, u, t)))
    return abs(left - right)

"""Permutation mixtures for doubly stochastic chains.

A doubly stochastic matrix is a convex combination of permutation matrices,
i.e. the induced chain of an RDS supported on invertible maps.  This module
extracts such a representation constructively, builds the time-reversal dual
measure (each map's weight moved to its inverse), and evaluates the
relative-entropy upper bound H(Q, Q~) on the entropy production rate of the
induced chain.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    EPS_ALG,
    EPS_SUM,
    DeterministicMap,
    StochasticMatrix,
    ValidationError,
    as_stochastic,
    xlogratio,
)
from .rds import RDSMeasure


def require_invertible(q: RDSMeasure) -> RDSMeasure:
    for alpha in q.maps:
        if not alpha.is_permutation:
            raise ValidationError("measure contains a non-invertible map")
    return q


def require_doubly_stochastic(m: StochasticMatrix) -> StochasticMatrix:
    cols = m.m.sum(axis=0)
    bad = np.argwhere(np.abs(cols - 1.0) > EPS_SUM)
    if bad.size:
        j = int(bad[0][0])
        raise ValidationError(
            f"column {j + 1} sums to {cols[j]!r}, not 1: not doubly stochastic"
        )
    return m


def _find_matching(support: np.ndarray) -> list[int] | None:
    """Perfect matching of rows to columns over `support`, by augmenting
    paths; columns are tried in increasing order so ties break
    lexicographically."""
    n = support.shape[0]
    row_of: list[int] = [-1] * n  # column -> matched row

    def augment(r: int, seen: list[bool]) -> bool:
        for c in range(n):
            if support[r, c] and not seen[c]:
                seen[c] = True
                if row_of[c] < 0 or augment(row_of[c], seen):
                    row_of[c] = r
                    return True
        return False

    for r in range(n):
        if not augment(r, [False] * n):
            return None
    col_of = [-1] * n
    for c, r in enumerate(row_of):
        col_of[r] = c
    return col_of


def _caratheodory_prune(
    perms: list[tuple[int, ...]], weights: list[float], target_size: int
) -> tuple[list[tuple[int, ...]], list[float]]:
    """Reduce an affinely dependent permutation combination to at most
    `target_size` terms without changing the mixture."""
    perms = list(perms)
    weights = list(weights)
    n = len(perms[0])
    while len(perms) > target_size:
        k = len(perms)
        a = np.empty((n * n + 1, k))
        for col, img in enumerate(perms):
            p = np.zeros((n, n))
            p[np.arange(n), list(img)] = 1.0
            a[: n * n, col] = p.ravel()
        a[-1, :] = 1.0
        _, s, vt = np.linalg.svd(a)
        if len(s) >= k and s[-1] > 1e-12:
            break  # affinely independent; nothing to prune
        null = vt[-1]
        pos = [c for c in range(k) if null[c] > 1e-15]
        if not pos:
            null = -null
            pos = [c for c in range(k) if null[c] > 1e-15]
        if not pos:
            break
        drop = min(pos, key=lambda c: weights[c] / null[c])
        t = weights[drop] / null[drop]
        weights = [w - t * x for w, x in zip(weights, null)]
        weights[drop] = 0.0
        keep = [c for c in range(k) if weights[c] > 1e-15]
        perms = [perms[c] for c in keep]
        weights = [weights[c] for c in keep]
    return perms, weights


def birkhoff_decompose(m) -> RDSMeasure:
    """Write a doubly stochastic matrix as a permutation mixture.

    Repeatedly find a perfect matching on the positive entries, subtract the
    minimum matched entry, and zero the dust below EPS_ALG.  The support is
    then pruned to at most (n-1)^2 + 1 permutations and the weights
    renormalized.
    """
    m = require_doubly_stochastic(as_stochastic(m))
    n = m.n
    residual = np.array(m.m)
    perms: list[tuple[int, ...]] = []
    weights: list[float] = []
    while True:
        residual[residual < EPS_ALG] = 0.0
        if not residual.any():
            break
        match = _find_matching(residual > 0.0)
        if match is None:
            raise ValidationError(
                "no perfect matching on the positive entries; matrix is not "
                "doubly stochastic at tolerance"
            )
        w = float(min(residual[r, c] for r, c in enumerate(match)))
        perms.append(tuple(match))
        weights.append(w)
        for r, c in enumerate(match):
            residual[r, c] -= w
    perms, weights = _caratheodory_prune(perms, weights, (n - 1) ** 2 + 1)
    total = sum(weights)
    pairs = [
        (DeterministicMap(img), w / total) for img, w in zip(perms, weights)
    ]
    return require_invertible(RDSMeasure.from_pairs(pairs))


def dual_measure(q: RDSMeasure) -> RDSMeasure:
    """Time-reversal dual: the weight of each map moves to its inverse.

    The induced chain of the dual is the transpose of the original's.
    """
    require_invertible(q)
    return RDSMeasure.from_pairs(
        (alpha.inverse(), w) for alpha, w in q.support()
    )


def ep_upper_bound(q: RDSMeasure) -> float:
    """H(Q, Q~) = sum_a Q(a) log(Q(a) / Q(a^-1)); may be +inf.

    Upper-bounds the entropy production rate of the induced (doubly
    stochastic) chain, with equality when Q equals its dual.
    """
    require_invertible(q)
    total = 0.0
    for alpha, w in q.support():
        total += xlogratio(w, q.weight_of(alpha.inverse()))
        if math.isinf(total):
            return math.inf
    return float(total)

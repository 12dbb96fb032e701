"""Spanning-arborescence weights, matrix-tree determinants, and the
tree-weight (Hill) formula for the stationary distribution.

A rooted tree here is a spanning in-tree of the transition digraph: every
non-root state has exactly one outgoing edge and all edges lead toward the
root.  Its weight is the product of the transition probabilities along its
edges.  The generating function of the forests rooted at a state set I
evaluates as a determinant of the out-degree Laplacian with I's rows and
columns deleted, which is the workhorse behind both the stationary
distribution and the cycle weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .core import (
    EnumerationCapError,
    ReducibleChainError,
    StochasticMatrix,
    as_stochastic,
)

#: enumeration is the oracle path; past this size use the determinant route
ENUMERATION_CAP = 8

#: determinant values smaller than this in magnitude are numerical dust
_DET_FLOOR = 1e-14


@dataclass(frozen=True)
class RootedTree:
    """A spanning in-tree: parent[i] is the out-neighbor of non-root i."""

    root: int
    parent: tuple[tuple[int, int], ...]  # sorted (state, parent) pairs

    def weight(self, m: StochasticMatrix) -> float:
        w = 1.0
        for i, p in self.parent:
            w *= m.m[i, p]
        return float(w)


@dataclass(frozen=True)
class ForestWeight:
    roots: frozenset[int]
    value: float


def enumerate_rooted_trees(
    m, root: int
) -> Iterator[tuple[RootedTree, float]]:
    """Yield every positive-weight spanning in-tree with the given root.

    Trees are generated by assigning each non-root state an out-neighbor in
    the support digraph, depth-first, pruning as soon as a partial
    assignment closes a cycle.
    """
    m = as_stochastic(m)
    n = m.n
    if n > ENUMERATION_CAP:
        raise EnumerationCapError(
            f"tree enumeration capped at n <= {ENUMERATION_CAP}, got n = {n}"
        )
    vertices = [v for v in range(n) if v != root]
    parent = {}

    def creates_cycle(v: int) -> bool:
        # follow assigned parents from v; root (or an unassigned vertex)
        # terminates the walk, returning to v means a cycle
        u = parent[v]
        while True:
            if u == v:
                return True
            if u == root or u not in parent:
                return False
            u = parent[u]

    def rec(k: int) -> Iterator[tuple[RootedTree, float]]:
        if k == len(vertices):
            tree = RootedTree(root, tuple(sorted(parent.items())))
            yield tree, tree.weight(m)
            return
        v = vertices[k]
        for p in m.adjacency[v]:
            if p == v:
                continue
            parent[v] = p
            if not creates_cycle(v):
                yield from rec(k + 1)
            del parent[v]

    return rec(0)


def tree_weight_sum(m, root: int) -> float:
    """e(T_root): total weight of the in-trees rooted at `root`, by enumeration."""
    return float(sum(w for _, w in enumerate_rooted_trees(m, root)))


def forest_weight_det(m, roots: Iterable[int]) -> ForestWeight:
    """Weight of all spanning forests rooted at the set `roots`.

    Computed as det of (I - M) with the root rows and columns deleted.  An
    empty complement gives the empty product, 1.  Tiny negative results from
    pivoted elimination are clamped to zero.
    """
    m = as_stochastic(m)
    roots = frozenset(int(r) for r in roots)
    if not roots:
        raise ValueError("root set must be non-empty")
    for r in roots:
        if not (0 <= r < m.n):
            raise ValueError(f"root {r} outside 0..{m.n - 1}")
    keep = [i for i in range(m.n) if i not in roots]
    if not keep:
        return ForestWeight(roots, 1.0)
    d = np.eye(len(keep)) - m.m[np.ix_(keep, keep)]
    value = float(np.linalg.det(d))
    if abs(value) < _DET_FLOOR:
        value = 0.0
    return ForestWeight(roots, value)


def normalization(m) -> float:
    """Sigma = sum_i e(T_i), the tree-weight normalization factor."""
    m = as_stochastic(m)
    return float(sum(forest_weight_det(m, {i}).value for i in range(m.n)))


def hill_stationary(m) -> tuple[np.ndarray, float]:
    """Stationary distribution by tree weights: pi_i = e(T_i) / Sigma.

    Returns (pi, Sigma).  Requires an irreducible aperiodic chain; a
    degenerate tree-weight pattern (Sigma ~ 0) signals reducibility.
    """
    m = as_stochastic(m)
    weights = np.array([forest_weight_det(m, {i}).value for i in range(m.n)])
    sigma = float(weights.sum())
    if sigma <= _DET_FLOOR or not m.is_ergodic:
        raise ReducibleChainError(
            "tree-weight stationary distribution needs an ergodic chain"
        )
    pi = weights / sigma
    residual = float(np.max(np.abs(pi @ m.m - pi)))
    if residual > 1e-8:
        raise ReducibleChainError(
            f"tree-weight solution fails pi*M = pi (residual {residual:.3e})"
        )
    pi.setflags(write=False)
    return pi, sigma

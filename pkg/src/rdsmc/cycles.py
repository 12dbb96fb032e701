"""Derived-chain construction and the cycle coordinates of a Markov chain.

Walking a trajectory while popping every completed loop leaves an ordered,
duplicate-free state list: the derived chain.  Its stationary law is given
by spanning-tree/forest weights, and from it every simple cycle c of the
transition digraph gets a weight w_c, its almost-sure occurrence rate per
step.  Cycle weights reproduce the stationary edge fluxes and give an
alternative expression for the entropy production rate.

Cycles are stored canonically: a tuple of distinct states rotated so the
minimal state comes first.  Orientation matters from length 3 upward;
length 1 and 2 cycles coincide with their reversals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import trees
from .core import (
    EPS_ALG,
    CrossCheckError,
    EnumerationCapError,
    StochasticMatrix,
    ValidationError,
    as_stochastic,
    canonical_rotation,
    xlogratio,
)

#: hard cap on enumerated derived-chain states (simple paths)
DERIVED_STATE_CAP = 10**5

Cycle = tuple[int, ...]
DerivedState = tuple[int, ...]


def canonical_cycle(seq) -> Cycle:
    """Canonical form of a cycle: distinct states, minimum rotated to front."""
    seq = tuple(int(v) for v in seq)
    if len(set(seq)) != len(seq):
        raise ValidationError("cycle states must be distinct")
    if not seq:
        raise ValidationError("empty cycle")
    return canonical_rotation(seq)


def reverse_cycle(c: Cycle) -> Cycle:
    """The reversed cycle, re-canonicalized; equals c for lengths 1 and 2."""
    return canonical_cycle(tuple(reversed(c)))


def derived_step(
    eta: DerivedState, j: int, m: StochasticMatrix | None = None
) -> tuple[DerivedState, Cycle | None]:
    """Advance the derived chain by one observed state.

    A revisit of a state already in eta truncates the list back to it and
    emits the popped cycle; a fresh state is appended and no cycle forms.
    When a matrix is supplied the transition must have positive probability.
    """
    eta = tuple(eta)
    if not eta:
        raise ValidationError("derived state may not be empty")
    if m is not None and m.m[eta[-1], j] <= 0.0:
        raise ValidationError(
            f"transition {eta[-1] + 1}->{j + 1} has zero probability (1-indexed)"
        )
    if j in eta:
        s = eta.index(j)
        return eta[: s + 1], canonical_cycle(eta[s:])
    return eta + (j,), None


@dataclass(frozen=True)
class DerivedChain:
    """All derived states reachable from a fixed initial state, with their
    transition matrix (states sorted by length, then lexicographically)."""

    initial: int
    states: tuple[DerivedState, ...]
    trans: np.ndarray

    @property
    def index(self) -> dict[DerivedState, int]:
        return {s: k for k, s in enumerate(self.states)}

    def last_state(self, eta: DerivedState) -> int:
        """The digraph homomorphism onto the original chain."""
        return eta[-1]


def _simple_paths(m: StochasticMatrix, start: int, cap: int) -> list[DerivedState]:
    """All simple paths from `start` in the support digraph (including the
    trivial path), depth-first."""
    out: list[DerivedState] = []

    def rec(eta: tuple[int, ...], members: set[int]):
        if len(out) >= cap:
            raise EnumerationCapError(
                f"derived chain exceeds the {cap}-state cap"
            )
        out.append(eta)
        for j in m.adjacency[eta[-1]]:
            if j not in members:
                members.add(j)
                rec(eta + (j,), members)
                members.remove(j)

    rec((start,), {start})
    return out


def build_derived_chain(m, initial: int) -> DerivedChain:
    """Derived chain over all simple paths from `initial`.

    The edge [i1..it] -> [i1..is] carries weight M[it, is]; size-t states
    only reach sizes <= min(t+1, n).
    """
    m = as_stochastic(m)
    if not m.is_ergodic:
        raise ValidationError("derived chain needs an ergodic base chain")
    states = sorted(_simple_paths(m, int(initial), DERIVED_STATE_CAP),
                    key=lambda s: (len(s), s))
    index = {s: k for k, s in enumerate(states)}
    k = len(states)
    trans = np.zeros((k, k))
    for s, eta in enumerate(states):
        for j in m.adjacency[eta[-1]]:
            target, _ = derived_step(eta, j)
            trans[s, index[target]] += m.m[eta[-1], j]
    trans.setflags(write=False)
    return DerivedChain(int(initial), tuple(states), trans)


def derived_stationary(m, initial: int) -> dict[DerivedState, float]:
    """Stationary law of the derived chain by the tree/forest formula.

    Pi([i1..it]) = M[i1,i2] ... M[i_{t-1},i_t] * F(roots = {i1..it}) / Sigma,
    with Sigma the tree-weight normalization of the base chain.
    """
    m = as_stochastic(m)
    chain = build_derived_chain(m, initial)
    _, sigma = trees.hill_stationary(m)
    out: dict[DerivedState, float] = {}
    for eta in chain.states:
        prefix = 1.0
        for a, b in zip(eta, eta[1:]):
            prefix *= m.m[a, b]
        forest = trees.forest_weight_det(m, set(eta)).value
        out[eta] = float(prefix * forest / sigma)
    return out


@dataclass(frozen=True)
class CycleWeights:
    """Cycle weights w_c, the cycle distribution p_c and the mean cycle time."""

    weights: dict[Cycle, float]
    lam: float  # mean steps per completed cycle, 1 / sum_c w_c
    pc: dict[Cycle, float]

    def sorted_items(self) -> list[tuple[Cycle, float]]:
        """Cycles by descending weight, lexicographic tie-break."""
        return sorted(self.weights.items(), key=lambda kv: (-kv[1], kv[0]))


def cycle_weights(m) -> CycleWeights:
    """Weight of every simple cycle of the support digraph.

    For c = (i1, ..., it) in canonical rotation, w_c is the product of the
    cycle's edge probabilities times the forest weight rooted at c's states,
    normalized by Sigma.  The DFS explores, per starting state i1, only the
    simple paths through larger states, so each cycle is found exactly once
    already in canonical form.
    """
    m = as_stochastic(m)
    if not m.is_ergodic:
        raise ValidationError("cycle weights need an ergodic chain")
    _, sigma = trees.hill_stationary(m)
    n = m.n
    weights: dict[Cycle, float] = {}
    budget = DERIVED_STATE_CAP

    def rec(eta: tuple[int, ...], members: set[int], prefix: float):
        nonlocal budget
        budget -= 1
        if budget < 0:
            raise EnumerationCapError(
                f"cycle enumeration exceeds the {DERIVED_STATE_CAP}-path cap"
            )
        i1, last = eta[0], eta[-1]
        closing = m.m[last, i1]
        if closing > 0.0:
            forest = trees.forest_weight_det(m, members).value
            weights[eta] = float(prefix * closing * forest / sigma)
        for j in m.adjacency[last]:
            if j > i1 and j not in members:
                members.add(j)
                rec(eta + (j,), members, prefix * m.m[last, j])
                members.remove(j)

    for i1 in range(n):
        rec((i1,), {i1}, 1.0)

    total = sum(weights.values())
    if total <= 0.0:
        raise ValidationError("no cycles found; chain cannot be ergodic")
    pc = {c: float(w / total) for c, w in weights.items()}
    return CycleWeights(weights, 1.0 / total, pc)


@dataclass(frozen=True)
class CirculationDefects:
    """Worst-case mismatch of the cycle coordinates against pi and the fluxes."""

    state_defect: float  # max_i |sum_{c: i in c} w_c - pi_i|
    edge_defect: float  # max_ij |sum_{c: edge ij in c} w_c - pi_i M_ij|


def _cycle_edges(c: Cycle) -> list[tuple[int, int]]:
    """Directed edges of a cycle; a self-loop (i) has the single edge (i, i)
    and a 2-cycle (i, j) has both (i, j) and (j, i)."""
    if len(c) == 1:
        return [(c[0], c[0])]
    return [(c[s], c[(s + 1) % len(c)]) for s in range(len(c))]


def circulation_identities(m) -> CirculationDefects:
    """Check sum_c w_c J_c(i) = pi_i and sum_c w_c J_c(i,j) = pi_i M_ij."""
    m = as_stochastic(m)
    pi, _ = trees.hill_stationary(m)
    cw = cycle_weights(m)
    state_sum = np.zeros(m.n)
    edge_sum = np.zeros((m.n, m.n))
    for c, w in cw.weights.items():
        for i in c:
            state_sum[i] += w
        for i, j in _cycle_edges(c):
            edge_sum[i, j] += w
    state_defect = float(np.max(np.abs(state_sum - pi)))
    edge_defect = float(np.max(np.abs(edge_sum - pi[:, None] * m.m)))
    return CirculationDefects(state_defect, edge_defect)


def cycle_ep_forms(m) -> tuple[float, float]:
    """Entropy production via cycles: (sum_c w_c log(w_c / w_{c-}),
    H(p_c, p_{c-}) / lambda)."""
    m = as_stochastic(m)
    m.require_symmetric_support()
    cw = cycle_weights(m)
    w_form = 0.0
    h_pc = 0.0
    for c, w in cw.weights.items():
        cr = reverse_cycle(c)
        if cr == c:
            continue  # self-reversed cycles contribute log 1
        wr = cw.weights.get(cr, 0.0)
        if w > 0.0 and wr <= 0.0:
            raise CrossCheckError(
                f"cycle {c} has positive weight but its reversal has none "
                "despite symmetric support"
            )
        w_form += xlogratio(w, wr)
        h_pc += xlogratio(cw.pc[c], cw.pc.get(cr, 0.0))
    return w_form, h_pc / cw.lam


def cycle_ep(m) -> float:
    """Entropy production rate from the cycle coordinates.

    Both cycle forms are evaluated and must agree to EPS_ALG.
    """
    w_form, pc_form = cycle_ep_forms(m)
    if abs(w_form - pc_form) > EPS_ALG:
        raise CrossCheckError(
            f"cycle entropy-production forms disagree: {w_form!r} vs {pc_form!r}"
        )
    return w_form


def format_cycle_report(cw: CycleWeights) -> str:
    """One line per cycle: `(i1,...,it) w_c p_c`, 1-indexed, by falling w_c."""
    lines = []
    for c, w in cw.sorted_items():
        label = "(" + ",".join(str(i + 1) for i in c) + ")"
        lines.append(f"{label} {w!r} {cw.pc[c]!r}")
    return "\n".join(lines) + "\n"

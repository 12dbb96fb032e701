"""Entropy and entropy-production functionals for finite Markov chains.

Three families of quantities live here, all in nats:

* state functions of the instantaneous distribution p(t): Shannon entropy,
  relative entropy against the stationary distribution, free energy;
* path functionals over the chain's finite-horizon path measure:
  Shannon-Khinchin entropy and the relative entropy of the path measure
  against its time reversal, with their per-step increments;
* the stationary entropy production rate, in its several equivalent forms.

The stationary distribution is always computed twice, by a linear solve and
by the spanning-tree route, and the two must agree; disagreement is a hard
error rather than a warning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import trees
from .core import (
    EPS_ALG,
    CrossCheckError,
    ReducibleChainError,
    StochasticMatrix,
    ValidationError,
    as_stochastic,
    prob_vector,
    xlogratio,
    xlogx,
)

#: max disagreement allowed between the two stationary routes
_PI_CROSS_TOL = 1e-8


def shannon(p) -> float:
    """Shannon entropy -sum p_i log p_i, with 0 log 0 = 0."""
    p = prob_vector(p)
    return 0.0 + -sum(xlogx(float(x)) for x in p)


def rel_entropy(p, q) -> float:
    """Kullback-Leibler divergence sum p_i log(p_i / q_i).

    Returns +inf when p is not absolutely continuous w.r.t. q.
    """
    p = prob_vector(p)
    q = prob_vector(q)
    if len(p) != len(q):
        raise ValidationError("vectors of different lengths")
    return sum(xlogratio(float(a), float(b)) for a, b in zip(p, q))


def linear_stationary(m) -> np.ndarray:
    """Stationary distribution from the singular system (I - M^T) pi = 0
    with the normalization row appended (least squares)."""
    m = as_stochastic(m)
    n = m.n
    a = np.vstack([np.eye(n) - m.m.T, np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    return pi


def stationary(m) -> np.ndarray:
    """Stationary distribution, guarded by two independent algorithms.

    The linear-solve route and the tree-weight route must agree to within
    1e-8 in max norm; otherwise the matrix is numerically untrustworthy and
    a CrossCheckError is raised.
    """
    m = as_stochastic(m)
    if not m.is_ergodic:
        raise ReducibleChainError("stationary distribution needs an ergodic chain")
    pi_lin = linear_stationary(m)
    pi_tree, _ = trees.hill_stationary(m)
    gap = float(np.max(np.abs(pi_lin - pi_tree)))
    if gap > _PI_CROSS_TOL:
        raise CrossCheckError(
            f"stationary solvers disagree by {gap:.3e} (> {_PI_CROSS_TOL})"
        )
    pi = np.maximum(pi_lin, 0.0)
    pi = pi / pi.sum()
    pi.setflags(write=False)
    return pi


def check_h_monotone(m, p0, horizon: int) -> np.ndarray:
    """H(p(t), pi) for t = 0..horizon; non-increasing for ergodic chains."""
    m = as_stochastic(m)
    pi = stationary(m)
    p = prob_vector(p0)
    out = np.empty(horizon + 1)
    for t in range(horizon + 1):
        out[t] = rel_entropy(p, pi)
        p = prob_vector(p @ m.m)
    return out


@dataclass(frozen=True)
class DeltaSDecomposition:
    """One-step Shannon entropy change split as production plus heat."""

    delta_s: float
    ep_term: float  # non-negative entropy production part
    heat_term: float  # heat exchange part, any sign


def delta_s_decompose(m, p) -> DeltaSDecomposition:
    """Split S(p M) - S(p) into a non-negative production term and a heat term.

    delta_s  = S(p') - S(p) with p' = p M
    ep_term  = sum_ij p_i M_ij log(p_i M_ij / (p'_j M_ji))
    heat_term = sum_ij p_i M_ij log(M_ji / M_ij)
    """
    m = as_stochastic(m)
    m.require_symmetric_support()
    p = prob_vector(p)
    if len(p) != m.n:
        raise ValidationError("dimension mismatch")
    pn = prob_vector(p @ m.m)
    ep_term = 0.0
    heat_term = 0.0
    for i in range(m.n):
        for j in range(m.n):
            flux = p[i] * m.m[i, j]
            if flux <= 0.0:
                continue
            ep_term += xlogratio(flux, pn[j] * m.m[j, i])
            heat_term += flux * math.log(m.m[j, i] / m.m[i, j])
    return DeltaSDecomposition(
        shannon(pn) - shannon(p), float(ep_term), float(heat_term)
    )


def free_energy(p, m) -> float:
    """Mean energy minus entropy, with energy -log pi_i; equals H(p, pi)."""
    m = as_stochastic(m)
    pi = stationary(m)
    if np.any(pi <= 0.0):
        raise ValidationError("stationary distribution has zero entries")
    p = prob_vector(p)
    mean_energy = float(np.dot(p, -np.log(pi)))
    return mean_energy - shannon(p)


def _row_entropies(m: StochasticMatrix) -> np.ndarray:
    return np.array([-sum(xlogx(float(x)) for x in row) for row in m.m])


def hsk(m, p0, t: int) -> float:
    """Shannon entropy of the path measure on [0, t], in closed form.

    S(p(0)) plus, for each step s < t, the mean row entropy under p(s).
    """
    m = as_stochastic(m)
    p = prob_vector(p0)
    if t < 0:
        raise ValidationError("horizon must be >= 0")
    rowent = _row_entropies(m)
    total = shannon(p)
    for _ in range(t):
        total += float(np.dot(p, rowent))
        p = prob_vector(p @ m.m)
    return total


def metric_entropy_mc(m, pi=None) -> float:
    """Metric entropy h = -sum_ij pi_i M_ij log M_ij (nats per step)."""
    m = as_stochastic(m)
    pi = stationary(m) if pi is None else prob_vector(pi)
    return 0.0 + float(np.dot(pi, _row_entropies(m)))


def time_reversed(m, p_prev, p_next) -> StochasticMatrix:
    """Transition matrix of the time-reversed step: M~_ij = p_prev_j M_ji / p_next_i.

    Row-stochastic whenever p_next = p_prev M; with both arguments equal to
    the stationary distribution this is the stationary reversal.
    """
    m = as_stochastic(m)
    p_prev = prob_vector(p_prev)
    p_next = prob_vector(p_next)
    if np.any(p_next <= 0.0):
        raise ValidationError("p_next must be strictly positive")
    rev = (p_prev[None, :] * m.m.T) / p_next[:, None]
    return StochasticMatrix(rev)


def path_rel_entropy(m, p0, t: int) -> float:
    """Relative entropy of the path measure on [0, t] against its reversal.

    Uses the telescoped form
        sum_i (p_i(0) - p_i(t)) log p_i(0)
        + sum_{s<t} sum_ij p_i(s) M_ij log(M_ij / M_ji),
    which the brute-force path-sum tests certify.
    """
    m = as_stochastic(m)
    m.require_symmetric_support()
    p0 = prob_vector(p0)
    if np.any(p0 <= 0.0):
        raise ValidationError("p0 must be strictly positive")
    if t < 0:
        raise ValidationError("horizon must be >= 0")
    edge = _edge_log_asymmetry(m)
    p = p0
    acc = 0.0
    for _ in range(t):
        acc += float(np.sum(p[:, None] * edge))
        p = prob_vector(p @ m.m)
    boundary = float(np.dot(p0 - p, np.log(p0)))
    return boundary + acc


def _edge_log_asymmetry(m: StochasticMatrix) -> np.ndarray:
    """edge[i, j] = M_ij log(M_ij / M_ji) on the (symmetric) support, else 0."""
    out = np.zeros((m.n, m.n))
    for i in range(m.n):
        for j in range(m.n):
            if m.m[i, j] > 0.0:
                out[i, j] = m.m[i, j] * math.log(m.m[i, j] / m.m[j, i])
    return out


@dataclass(frozen=True)
class EpReport:
    """Stationary entropy production rate and its equivalent evaluations."""

    ep_rate: float
    detailed_balance: bool
    fluxes: np.ndarray  # pi_i M_ij
    pi: np.ndarray
    flux_ratio_form: float
    reversal_form: float
    antisymmetric_form: float


def ep_rate(m) -> EpReport:
    """Entropy production rate e_p = sum_ij pi_i M_ij log(M_ij / M_ji).

    Also evaluates the flux-ratio, reversed-matrix and antisymmetrized
    half-sum forms; all four must agree to EPS_ALG or the report is refused.
    Detailed balance is flagged exactly when e_p vanishes at tolerance.
    """
    m = as_stochastic(m)
    m.require_symmetric_support()
    pi = stationary(m)
    n = m.n
    fluxes = pi[:, None] * m.m
    edge = _edge_log_asymmetry(m)
    ep = float(np.dot(pi, edge.sum(axis=1)))

    flux_ratio = 0.0
    antisym = 0.0
    for i in range(n):
        for j in range(n):
            f, g = fluxes[i, j], fluxes[j, i]
            if f > 0.0:
                flux_ratio += f * math.log(f / g)
                antisym += 0.5 * (f - g) * math.log(f / g)

    rev = time_reversed(m, pi, pi)
    reversal = 0.0
    for i in range(n):
        for j in range(n):
            if m.m[i, j] > 0.0:
                reversal += fluxes[i, j] * math.log(m.m[i, j] / rev.m[i, j])

    values = [ep, flux_ratio, reversal, antisym]
    spread = max(values) - min(values)
    if spread > EPS_ALG:
        raise CrossCheckError(
            f"entropy production forms disagree by {spread:.3e}"
        )
    fluxes.setflags(write=False)
    return EpReport(
        ep_rate=float(ep),
        detailed_balance=ep <= EPS_ALG,
        fluxes=fluxes,
        pi=pi,
        flux_ratio_form=float(flux_ratio),
        reversal_form=float(reversal),
        antisymmetric_form=float(antisym),
    )


def ep_step(m, p0, t: int) -> float:
    """Per-step increment of the path relative entropy at step t.

    Equals sum_ij p_i(t) M_ij log(p_i(0) M_ij / (p_j(0) M_ji)) and converges
    to the stationary entropy production rate.
    """
    m = as_stochastic(m)
    m.require_symmetric_support()
    p0 = prob_vector(p0)
    if np.any(p0 <= 0.0):
        raise ValidationError("p0 must be strictly positive")
    p = p0
    for _ in range(t):
        p = prob_vector(p @ m.m)
    acc = 0.0
    for i in range(m.n):
        for j in range(m.n):
            flux = p[i] * m.m[i, j]
            if flux > 0.0:
                acc += flux * math.log(
                    (p0[i] * m.m[i, j]) / (p0[j] * m.m[j, i])
                )
    return float(acc)


def nonstationarity_gap(m, p_prev) -> float:
    """KL rate of the step (p, pM) against the stationary reversal.

    sum_ij p_i M_ij log(p_i M_ij / (p'_j R_ji)) with R_ji = pi_i M_ij / pi_j;
    equals H(p, pi) - H(p M, pi), hence it vanishes exactly at stationarity.
    """
    m = as_stochastic(m)
    pi = stationary(m)
    p = prob_vector(p_prev)
    if np.any(p <= 0.0):
        raise ValidationError("p must be strictly positive")
    pn = prob_vector(p @ m.m)
    acc = 0.0
    for i in range(m.n):
        for j in range(m.n):
            flux = p[i] * m.m[i, j]
            if flux > 0.0:
                rev_ji = pi[i] * m.m[i, j] / pi[j]
                acc += flux * math.log(flux / (pn[j] * rev_ji))
    return float(acc)

"""Seeded stochastic simulation of chains and map-driven dynamics.

Every operation is a pure function of its inputs and a 64-bit seed: the
counter-based generator (see `rng`) assigns an independent keyed stream to
each purpose (initial draw, chain steps, map draws, CFTP samples), so
identical calls replay identical randomness, and coupling-from-the-past can
re-evaluate the map of a given past time slot without storing it.

All points of a multi-point motion are driven by one shared map sequence
(the grand coupling).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import kernels, rng
from .core import (
    CoalescenceError,
    DeterministicMap,
    StochasticMatrix,
    ValidationError,
    as_stochastic,
    prob_vector,
)
from .cycles import Cycle, DerivedState, derived_step
from .rds import MaxEntRDS, RDSMeasure

# substream ids, one per purpose
_STREAM_INITIAL = 0
_STREAM_STEPS = 1
_STREAM_MAPS = 2
_STREAM_CFTP = 3
_STREAM_PULLBACK = 4

#: default cap for CFTP horizons: 2**20 steps into the past
DEFAULT_CFTP_DOUBLINGS = 20


@dataclass(frozen=True)
class Trajectory:
    """A sampled state path plus the randomness that produced it."""

    states: np.ndarray
    seed: int
    generator: str = rng.GENERATOR_ID

    def __post_init__(self):
        object.__setattr__(
            self, "states", np.ascontiguousarray(self.states, dtype=np.int64)
        )
        self.states.setflags(write=False)

    def __len__(self) -> int:
        return len(self.states)


def dump_trajectory(traj: Trajectory) -> str:
    """Header `seed=<n> generator=<id>`, then one 1-indexed state per line."""
    head = f"seed={traj.seed} generator={traj.generator}"
    return head + "\n" + "\n".join(str(int(s) + 1) for s in traj.states) + "\n"


def load_trajectory(text: str) -> Trajectory:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or "seed=" not in lines[0]:
        raise ValidationError("missing trajectory header")
    fields = dict(tok.split("=", 1) for tok in lines[0].split())
    states = np.array([int(ln) - 1 for ln in lines[1:]], dtype=np.int64)
    return Trajectory(states, int(fields["seed"]), fields.get("generator", "?"))


# ---------------------------------------------------------------------------
# map sequence sources


@dataclass(frozen=True)
class IIDMapSource:
    """Maps drawn independently from a fixed measure each step."""

    measure: RDSMeasure

    @property
    def maps(self) -> tuple[DeterministicMap, ...]:
        return self.measure.maps

    @property
    def n(self) -> int:
        return self.measure.n


@dataclass(frozen=True)
class MarkovMapSource:
    """Maps drawn by a Markov chain over the map atoms themselves."""

    maps: tuple[DeterministicMap, ...]
    trans: StochasticMatrix  # k x k chain over the atoms
    initial: np.ndarray  # length-k distribution of the first map

    def __post_init__(self):
        object.__setattr__(self, "initial", prob_vector(self.initial))
        if self.trans.n != len(self.maps):
            raise ValidationError("map chain size differs from atom count")
        if len(self.initial) != len(self.maps):
            raise ValidationError("initial distribution size differs from atoms")
        n = self.maps[0].n
        for a in self.maps:
            if a.n != n:
                raise ValidationError("maps live on different state spaces")

    @property
    def n(self) -> int:
        return self.maps[0].n


MapSequenceSource = Union[IIDMapSource, MarkovMapSource]


def _image_table(maps) -> np.ndarray:
    return np.ascontiguousarray(
        [list(a.image) for a in maps], dtype=np.int64
    )


def _draw_map_indices(
    source: MapSequenceSource, steps: int, key: int, runs: int = 1
) -> np.ndarray:
    """(runs, steps) map indices; run r uses substream r of `key`."""
    out = np.empty((runs, steps), dtype=np.int64)
    if isinstance(source, IIDMapSource):
        cum = np.cumsum(source.measure.weights)
        cum[-1] = 1.0
        for r in range(runs):
            u = rng.uniforms(rng.substream(key, r), steps)
            out[r] = np.minimum(
                np.searchsorted(cum, u, side="right"), len(cum) - 1
            )
    else:
        cum_init = np.cumsum(source.initial)
        cum_init[-1] = 1.0
        cum_rows = source.trans.cumulative_rows()
        k = len(source.maps)
        for r in range(runs):
            u = rng.uniforms(rng.substream(key, r), steps)
            cur = min(
                int(np.searchsorted(cum_init, u[0], side="right")), k - 1
            )
            out[r, 0] = cur
            for t in range(1, steps):
                cur = min(
                    int(np.searchsorted(cum_rows[cur], u[t], side="right")),
                    k - 1,
                )
                out[r, t] = cur
    return out


# ---------------------------------------------------------------------------
# one-point chain simulation


def simulate_mc(m, p0, steps: int, seed: int) -> Trajectory:
    """Sample a chain path: X_0 ~ p0, then `steps` transitions."""
    m = as_stochastic(m)
    p0 = prob_vector(p0)
    if len(p0) != m.n:
        raise ValidationError("dimension mismatch")
    cum0 = np.cumsum(p0)
    cum0[-1] = 1.0
    u0 = rng.counter_u01(rng.substream(seed, _STREAM_INITIAL), 0)
    start = min(int(np.searchsorted(cum0, u0, side="right")), m.n - 1)
    us = rng.uniforms(rng.substream(seed, _STREAM_STEPS), steps)
    path = kernels.mc_path(m.cumulative_rows(), start, us)
    return Trajectory(path, seed)


def simulate_mc_from(m, start: int, steps: int, seed: int) -> Trajectory:
    """Sample a chain path from a fixed initial state."""
    m = as_stochastic(m)
    us = rng.uniforms(rng.substream(seed, _STREAM_STEPS), steps)
    path = kernels.mc_path(m.cumulative_rows(), int(start), us)
    return Trajectory(path, seed)


# ---------------------------------------------------------------------------
# RDS simulation: grand coupling


@dataclass(frozen=True)
class RDSRun:
    """Grand-coupled trajectories driven by one shared map sequence."""

    trajectories: tuple[Trajectory, ...]
    map_indices: np.ndarray
    maps: tuple[DeterministicMap, ...]


def simulate_rds(
    source: MapSequenceSource, starts, steps: int, seed: int
) -> RDSRun:
    """Drive every start point with the same sampled map sequence."""
    starts = [int(x) for x in np.atleast_1d(starts)]
    idx = _draw_map_indices(source, steps, rng.substream(seed, _STREAM_MAPS))[0]
    images = _image_table(source.maps)
    paths = np.empty((len(starts), steps + 1), dtype=np.int64)
    paths[:, 0] = starts
    for t in range(steps):
        paths[:, t + 1] = images[idx[t], paths[:, t]]
    trajs = tuple(Trajectory(row, seed) for row in paths)
    return RDSRun(trajs, idx, tuple(source.maps))


def simulate_rds_batch(
    source: MapSequenceSource, starts, steps: int, runs: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Many independent grand-coupled runs at once.

    Returns (paths, map_indices) with paths of shape (runs, npoints,
    steps+1): within a run all points share the run's map sequence, across
    runs the sequences are independent.
    """
    starts = [int(x) for x in np.atleast_1d(starts)]
    idx = _draw_map_indices(
        source, steps, rng.substream(seed, _STREAM_MAPS), runs=runs
    )
    images = _image_table(source.maps)
    paths = np.empty((runs, len(starts), steps + 1), dtype=np.int64)
    paths[:, :, 0] = starts
    for t in range(steps):
        paths[:, :, t + 1] = images[idx[:, t, None], paths[:, :, t]]
    return paths, idx


# ---------------------------------------------------------------------------
# pullback composition and coupling from the past


def _materialized(q: Union[RDSMeasure, MaxEntRDS]) -> RDSMeasure:
    if isinstance(q, MaxEntRDS):
        return RDSMeasure.from_pairs(q.support())
    return q


def pullback_support(
    q: Union[RDSMeasure, MaxEntRDS], steps: int, seed: int
) -> np.ndarray:
    """Support sizes of the pullback composition at depths 0..steps.

    Each newly drawn map composes on the inside (earliest time), so the
    image can only shrink; size 1 means the realization has synchronized.
    """
    q = _materialized(q)
    images = _image_table(q.maps)
    cum = np.cumsum(q.weights)
    cum[-1] = 1.0
    key = rng.substream(seed, _STREAM_PULLBACK)
    n = q.n
    comp = np.arange(n, dtype=np.int64)
    sizes = np.empty(steps + 1, dtype=np.int64)
    sizes[0] = n
    for t in range(1, steps + 1):
        u = rng.counter_u01(key, t)
        k = min(int(np.searchsorted(cum, u, side="right")), len(cum) - 1)
        comp = comp[images[k]]
        sizes[t] = len(np.unique(comp))
    sizes.setflags(write=False)
    return sizes


def cftp_sample_many(
    q: Union[RDSMeasure, MaxEntRDS],
    seed: int,
    samples: int,
    max_doublings: int = DEFAULT_CFTP_DOUBLINGS,
) -> tuple[np.ndarray, np.ndarray]:
    """Perfect samples by coupling from the past, one keyed stream each.

    Returns (states, horizons).  Raises CoalescenceError if any sample fails
    to coalesce within 2**max_doublings past steps (e.g. for a
    permutation-only measure, which never synchronizes).
    """
    q = _materialized(q)
    images = _image_table(q.maps)
    cum = np.cumsum(q.weights)
    cum[-1] = 1.0
    base = rng.substream(seed, _STREAM_CFTP)
    keys = np.array(
        [rng.substream(base, s) for s in range(samples)], dtype=np.uint64
    )
    states, horizons = kernels.cftp_many(images, cum, keys, max_doublings)
    if np.any(states < 0):
        bad = int(np.argmax(states < 0))
        raise CoalescenceError(
            f"sample {bad} did not coalesce within 2**{max_doublings} steps; "
            "the RDS may not synchronize (e.g. permutation-only support)"
        )
    return states, horizons


def cftp_sample(
    q: Union[RDSMeasure, MaxEntRDS],
    seed: int,
    max_doublings: int = DEFAULT_CFTP_DOUBLINGS,
) -> int:
    """A single perfect sample from the stationary law of the induced chain."""
    states, _ = cftp_sample_many(q, seed, 1, max_doublings)
    return int(states[0])


# ---------------------------------------------------------------------------
# empirical cycle statistics


@dataclass(frozen=True)
class DerivedReplay:
    """Derived-chain states and popped cycles along a given trajectory."""

    etas: tuple[DerivedState, ...]
    cycles: tuple[tuple[int, Cycle], ...]  # (step index, cycle)


def replay_derived_chain(traj, m=None) -> DerivedReplay:
    """Fold `derived_step` over a trajectory, recording every state and cycle."""
    states = [int(s) for s in (traj.states if isinstance(traj, Trajectory) else traj)]
    if not states:
        raise ValidationError("empty trajectory")
    eta: DerivedState = (states[0],)
    etas = [eta]
    cycles: list[tuple[int, Cycle]] = []
    mat = None if m is None else as_stochastic(m)
    for t, j in enumerate(states[1:], start=1):
        eta, popped = derived_step(eta, j, mat)
        etas.append(eta)
        if popped is not None:
            cycles.append((t, popped))
    return DerivedReplay(tuple(etas), tuple(cycles))


@dataclass(frozen=True)
class EmpiricalCycles:
    """Observed cycle counts along a simulated trajectory."""

    counts: dict[Cycle, int]
    steps: int

    @property
    def w_hat(self) -> dict[Cycle, float]:
        """Occurrences per step, the estimator of w_c."""
        return {c: k / self.steps for c, k in self.counts.items()}

    @property
    def p_hat(self) -> dict[Cycle, float]:
        total = sum(self.counts.values())
        return {c: k / total for c, k in self.counts.items()}

    @property
    def mean_cycle_length(self) -> float:
        """Average length of the completed cycles; estimates lambda."""
        total = sum(self.counts.values())
        return sum(len(c) * k for c, k in self.counts.items()) / total


def empirical_cycles(m, initial: int, steps: int, seed: int) -> EmpiricalCycles:
    """Simulate `steps` transitions from `initial` and count popped cycles."""
    m = as_stochastic(m)
    traj = simulate_mc_from(m, initial, steps, seed)
    counts = kernels.count_cycles(traj.states)
    return EmpiricalCycles(counts, steps)

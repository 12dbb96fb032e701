"""Pure-Python implementations of the hot simulation kernels.

These mirror the compiled versions in `_ckernels.pyx` exactly; the facade in
`kernels.py` picks whichever is importable.  Outputs must be bit-identical
between the two backends (the parity tests enforce this).
"""

from __future__ import annotations

from bisect import bisect_right

import numpy as np

from .rng import counter_u01

BACKEND = "python"


def mc_path(cum_rows: np.ndarray, start: int, uniforms: np.ndarray) -> np.ndarray:
    """Walk a Markov chain: uniforms[t] picks the step from state path[t]."""
    nsteps = len(uniforms)
    n = cum_rows.shape[0]
    path = np.empty(nsteps + 1, dtype=np.int64)
    path[0] = start
    cur = int(start)
    rows = [list(cum_rows[i]) for i in range(n)]
    for t in range(nsteps):
        nxt = bisect_right(rows[cur], uniforms[t])
        if nxt >= n:
            nxt = n - 1
        path[t + 1] = nxt
        cur = nxt
    return path


def count_cycles(traj: np.ndarray) -> dict:
    """Pop cycles off a trajectory's derived chain and count them.

    Returns a dict mapping canonical cycle tuples (minimum state first) to
    the number of times the cycle was completed along the trajectory.
    """
    n = int(traj.max()) + 1
    stack = [0] * n
    pos = [-1] * n
    first = int(traj[0])
    stack[0] = first
    pos[first] = 0
    top = 0
    counts: dict = {}
    for t in range(1, len(traj)):
        j = int(traj[t])
        p = pos[j]
        if p >= 0:
            cyc = _canonical(stack[p : top + 1])
            counts[cyc] = counts.get(cyc, 0) + 1
            for q in range(p + 1, top + 1):
                pos[stack[q]] = -1
            top = p
        else:
            top += 1
            stack[top] = j
            pos[j] = top
    return counts


def _canonical(seq) -> tuple:
    r = seq.index(min(seq))
    return tuple(seq[r:]) + tuple(seq[:r])


def cftp_many(
    images: np.ndarray,
    cum_q: np.ndarray,
    keys: np.ndarray,
    max_doublings: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Coupling from the past for a batch of keyed samples.

    images[k] is the image array of the k-th map in the support; cum_q its
    cumulative weights.  For each key, the map of past time slot s is drawn
    with counter s, so doubling the horizon reuses identical past draws.
    Returns (states, horizons); a state of -1 marks no coalescence within
    2**max_doublings steps.
    """
    nmaps, n = images.shape
    cum = list(cum_q)
    out = np.empty(len(keys), dtype=np.int64)
    horizon = np.empty(len(keys), dtype=np.int64)
    ident = np.arange(n, dtype=np.int64)
    for s, key in enumerate(keys):
        key = int(key)
        comp = ident
        t_prev = 0
        out[s] = -1
        horizon[s] = 1 << max_doublings
        for d in range(max_doublings + 1):
            t_new = 1 << d
            block = ident
            for slot in range(t_prev + 1, t_new + 1):
                idx = bisect_right(cum, counter_u01(key, slot))
                if idx >= nmaps:
                    idx = nmaps - 1
                block = block[images[idx]]
            comp = comp[block]
            t_prev = t_new
            v = comp[0]
            if np.all(comp == v):
                out[s] = v
                horizon[s] = t_new
                break
    return out, horizon

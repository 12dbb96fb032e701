# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot simulation kernels.

Must stay bit-identical to `_pykernels.py`; the parity tests compare both.
"""

import numpy as np

BACKEND = "cython"

ctypedef unsigned long long u64

cdef u64 _PHI = 0x9E3779B97F4A7C15ULL
cdef u64 _M1 = 0xBF58476D1CE4E5B9ULL
cdef u64 _M2 = 0x94D049BB133111EBULL


cdef inline u64 _mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * _M1
    z = (z ^ (z >> 27)) * _M2
    return z ^ (z >> 31)


cdef inline double _counter_u01(u64 key, u64 ctr) nogil:
    cdef u64 z = _mix64(key + (ctr + 1) * _PHI)
    return <double>(z >> 11) * (1.0 / 9007199254740992.0)


cdef inline Py_ssize_t _bisect_right(const double* arr, Py_ssize_t hi, double u) nogil:
    cdef Py_ssize_t lo = 0, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


def mc_path(const double[:, ::1] cum_rows, Py_ssize_t start, const double[::1] uniforms):
    """Walk a Markov chain: uniforms[t] picks the step from state path[t]."""
    cdef Py_ssize_t nsteps = uniforms.shape[0]
    cdef Py_ssize_t n = cum_rows.shape[0]
    path_arr = np.empty(nsteps + 1, dtype=np.int64)
    cdef long long[::1] path = path_arr
    cdef Py_ssize_t cur = start, nxt, t
    path[0] = start
    with nogil:
        for t in range(nsteps):
            nxt = _bisect_right(&cum_rows[cur, 0], n, uniforms[t])
            if nxt >= n:
                nxt = n - 1
            path[t + 1] = nxt
            cur = nxt
    return path_arr


def count_cycles(const long long[::1] traj):
    """Pop cycles off a trajectory's derived chain and count them."""
    cdef Py_ssize_t tlen = traj.shape[0]
    cdef Py_ssize_t t, q, p, top, r, k
    cdef long long j, mn
    cdef Py_ssize_t n = 0
    for t in range(tlen):
        if traj[t] + 1 > n:
            n = traj[t] + 1
    stack_arr = np.zeros(n, dtype=np.int64)
    pos_arr = np.full(n, -1, dtype=np.int64)
    cdef long long[::1] stack = stack_arr
    cdef long long[::1] pos = pos_arr
    counts = {}
    stack[0] = traj[0]
    pos[traj[0]] = 0
    top = 0
    for t in range(1, tlen):
        j = traj[t]
        p = pos[j]
        if p >= 0:
            # canonical rotation: minimum state first
            r = p
            mn = stack[p]
            for q in range(p + 1, top + 1):
                if stack[q] < mn:
                    mn = stack[q]
                    r = q
            cyc = tuple([stack[k] for k in range(r, top + 1)] +
                        [stack[k] for k in range(p, r)])
            if cyc in counts:
                counts[cyc] += 1
            else:
                counts[cyc] = 1
            for q in range(p + 1, top + 1):
                pos[stack[q]] = -1
            top = p
        else:
            top += 1
            stack[top] = j
            pos[j] = top
    return counts


def cftp_many(const long long[:, ::1] images, const double[::1] cum_q,
              const unsigned long long[::1] keys, int max_doublings):
    """Coupling from the past for a batch of keyed samples.

    Returns (states, horizons); a state of -1 marks no coalescence within
    2**max_doublings steps.  The map of past slot s is drawn with counter s,
    so doubling the horizon reuses identical draws.
    """
    cdef Py_ssize_t nmaps = images.shape[0]
    cdef Py_ssize_t n = images.shape[1]
    cdef Py_ssize_t nkeys = keys.shape[0]
    out_arr = np.empty(nkeys, dtype=np.int64)
    hor_arr = np.empty(nkeys, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef long long[::1] hor = hor_arr
    comp_arr = np.empty(n, dtype=np.int64)
    block_arr = np.empty(n, dtype=np.int64)
    tmp_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] comp = comp_arr
    cdef long long[::1] block = block_arr
    cdef long long[::1] tmp = tmp_arr
    cdef Py_ssize_t s, d, x, idx
    cdef long long t_prev, t_new, slot, v
    cdef u64 key
    cdef bint done
    with nogil:
        for s in range(nkeys):
            key = keys[s]
            for x in range(n):
                comp[x] = x
            t_prev = 0
            out[s] = -1
            hor[s] = 1LL << max_doublings
            for d in range(max_doublings + 1):
                t_new = 1LL << d
                for x in range(n):
                    block[x] = x
                for slot in range(t_prev + 1, t_new + 1):
                    idx = _bisect_right(&cum_q[0], nmaps, _counter_u01(key, <u64>slot))
                    if idx >= nmaps:
                        idx = nmaps - 1
                    for x in range(n):
                        tmp[x] = block[images[idx, x]]
                    for x in range(n):
                        block[x] = tmp[x]
                for x in range(n):
                    tmp[x] = comp[block[x]]
                for x in range(n):
                    comp[x] = tmp[x]
                t_prev = t_new
                v = comp[0]
                done = True
                for x in range(1, n):
                    if comp[x] != v:
                        done = False
                        break
                if done:
                    out[s] = v
                    hor[s] = t_new
                    break
    return out_arr, hor_arr

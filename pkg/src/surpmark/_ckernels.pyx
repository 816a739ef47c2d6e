# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels.

Semantics mirror ``surpmark._kernels_py`` exactly: same IEEE-754 operation
order per element and the same random-stream consumption, so results are
bit-identical across backends.
"""

import numpy as np

cimport numpy as cnp

from surpmark._kernels_py import kmeans_prefixes

cnp.import_array()


cdef void _dc_layer(double[::1] d_prev, double[::1] d_cur,
                    long long[:, ::1] split_at, int q,
                    double[::1] cw, double[::1] cwx, double[::1] cwx2,
                    long long jlo, long long jhi,
                    long long ilo, long long ihi) noexcept:
    cdef long long jm, lo, hi, i, best
    cdef double sw, sx, sxx, val, best_val
    if jlo > jhi:
        return
    jm = (jlo + jhi) // 2
    lo = ilo if ilo > q else q
    hi = jm if jm < ihi else ihi
    best = lo
    best_val = np.inf
    for i in range(lo, hi + 1):
        sw = cw[jm + 1] - cw[i]
        sx = cwx[jm + 1] - cwx[i]
        sxx = cwx2[jm + 1] - cwx2[i]
        val = d_prev[i - 1] + (sxx - sx * sx / sw)
        if val < best_val:
            best_val = val
            best = i
    d_cur[jm] = best_val
    split_at[q, jm] = best
    _dc_layer(d_prev, d_cur, split_at, q, cw, cwx, cwx2, jlo, jm - 1, ilo, best)
    _dc_layer(d_prev, d_cur, split_at, q, cw, cwx, cwx2, jm + 1, jhi, best, ihi)


def kmeans_splits(values, weights, int k):
    """Exact weighted 1-D k-means over sorted distinct values; see fallback."""
    cdef long long m = np.asarray(values).shape[0]
    cdef long long j, q
    cw_arr, cwx_arr, cwx2_arr = kmeans_prefixes(values, weights)
    cdef double[::1] cw = cw_arr
    cdef double[::1] cwx = cwx_arr
    cdef double[::1] cwx2 = cwx2_arr

    split_arr = np.zeros((k, m), dtype=np.int64)
    cdef long long[:, ::1] split_at = split_arr
    d_prev_arr = np.empty(m)
    d_cur_arr = np.empty(m)
    cdef double[::1] d_prev = d_prev_arr
    cdef double[::1] d_cur = d_cur_arr
    cdef double sw, sx, sxx
    for j in range(m):
        sw = cw[j + 1] - cw[0]
        sx = cwx[j + 1] - cwx[0]
        sxx = cwx2[j + 1] - cwx2[0]
        d_prev[j] = sxx - sx * sx / sw

    for q in range(1, k):
        for j in range(m):
            d_cur[j] = np.inf
        _dc_layer(d_prev, d_cur, split_at, q, cw, cwx, cwx2, q, m - 1, q, m - 1)
        d_prev, d_cur = d_cur, d_prev

    starts = np.empty(k, dtype=np.int64)
    cdef long long[::1] st = starts
    j = m - 1
    for q in range(k - 1, -1, -1):
        st[q] = split_at[q, j]
        j = st[q] - 1
    cdef double sse = d_prev[m - 1]
    if sse < 0.0:
        sse = 0.0
    return starts, sse


def count_pairs(states, int k):
    """Count adjacent (state, next-state) pairs into a k x k matrix."""
    cdef long long[::1] s = np.ascontiguousarray(states, dtype=np.int64)
    cdef long long n = s.shape[0]
    out = np.zeros((k, k), dtype=np.int64)
    cdef long long[:, ::1] c = out
    cdef long long t
    for t in range(n - 1):
        c[s[t], s[t + 1]] += 1
    return out


def walk_chain(cum_rows, long long init_state, uniforms):
    """Inverse-CDF chain walk; full path of len(uniforms)+1 states."""
    cdef double[:, ::1] cum = np.ascontiguousarray(cum_rows, dtype=np.float64)
    cdef double[::1] u = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef long long k = cum.shape[0]
    cdef long long n = u.shape[0]
    out = np.empty(n + 1, dtype=np.int64)
    cdef long long[::1] o = out
    cdef long long s = init_state, t, nxt
    o[0] = s
    for t in range(n):
        nxt = 0
        while nxt < k - 1 and cum[s, nxt] < u[t]:
            nxt += 1
        s = nxt
        o[t + 1] = s
    return out


def simulate_transition_counts(cum_rows, init_states, long long steps, rng):
    """Lockstep batch simulation with per-trial transition counts."""
    cdef double[:, ::1] cum = np.ascontiguousarray(cum_rows, dtype=np.float64)
    states_arr = np.ascontiguousarray(init_states, dtype=np.int64).copy()
    cdef long long[::1] states = states_arr
    cdef long long n_trials = states.shape[0]
    cdef long long k = cum.shape[0]
    counts_arr = np.zeros((n_trials, k, k), dtype=np.int64)
    cdef long long[:, :, ::1] counts = counts_arr
    cdef double[::1] u
    cdef long long step, i, s, nxt
    for step in range(steps):
        u = rng.random(n_trials)
        for i in range(n_trials):
            s = states[i]
            nxt = 0
            while nxt < k - 1 and cum[s, nxt] < u[i]:
                nxt += 1
            counts[i, s, nxt] += 1
            states[i] = nxt
    return counts_arr

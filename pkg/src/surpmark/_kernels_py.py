"""Pure-numpy implementations of the hot kernels.

This is the fallback backend; ``surpmark._ckernels`` (Cython) implements the
same four functions with identical semantics. Both consume random numbers in
the same order and perform the same IEEE-754 operations per element, so
results are bit-identical across backends.

States are 0-based here; the public modules translate to the 1-based
alphabet.
"""

import sys

import numpy as np


def kmeans_prefixes(values, weights):
    """Prefix sums for segment-SSE queries, shared by both backends.

    Values are shifted by the weighted mean first, which keeps the prefix
    sums small and curbs cancellation. Building these arrays in one place
    keeps the two backends bit-identical.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    m = values.shape[0]
    mu = float(np.dot(values, weights) / weights.sum())
    x = values - mu
    wx = weights * x
    cw = np.zeros(m + 1)
    cwx = np.zeros(m + 1)
    cwx2 = np.zeros(m + 1)
    np.cumsum(weights, out=cw[1:])
    np.cumsum(wx, out=cwx[1:])
    np.cumsum(wx * x, out=cwx2[1:])
    return cw, cwx, cwx2


def kmeans_splits(values, weights, k):
    """Exact weighted 1-D k-means on sorted distinct values.

    Dynamic program over contiguous segments of the sorted points, with the
    divide-and-conquer speedup (the optimal split index is monotone in the
    right endpoint), giving O(k m log m).

    Parameters
    ----------
    values : (m,) float64, strictly ascending distinct values
    weights : (m,) float64, positive multiplicities
    k : int, number of clusters, 1 <= k <= m

    Returns
    -------
    starts : (k,) int64
        Start index of each cluster; cluster q covers
        ``values[starts[q]:starts[q+1]]``.
    sse : float
        Total within-cluster sum of squared deviations.
    """
    m = np.asarray(values).shape[0]
    cw, cwx, cwx2 = kmeans_prefixes(values, weights)

    def seg_cost(i, j):
        # SSE of values[i..j] inclusive; i may be an array for fixed j
        sw = cw[j + 1] - cw[i]
        sx = cwx[j + 1] - cwx[i]
        sxx = cwx2[j + 1] - cwx2[i]
        return sxx - sx * sx / sw

    split_at = np.zeros((k, m), dtype=np.int64)
    d_prev = seg_cost(np.zeros(m, dtype=np.int64), np.arange(m))
    d_cur = np.empty(m)

    # layer q: best partition of values[0..j] into q+1 clusters
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * m.bit_length() + 64))
    for q in range(1, k):
        d_cur.fill(np.inf)

        def solve(jlo, jhi, ilo, ihi):
            if jlo > jhi:
                return
            jm = (jlo + jhi) // 2
            lo = max(ilo, q)
            hi = min(jm, ihi)
            i_arr = np.arange(lo, hi + 1)
            cand = d_prev[i_arr - 1] + seg_cost(i_arr, jm)
            b = int(np.argmin(cand))  # first minimum: deterministic ties
            d_cur[jm] = cand[b]
            best = lo + b
            split_at[q, jm] = best
            solve(jlo, jm - 1, ilo, best)
            solve(jm + 1, jhi, best, ihi)

        solve(q, m - 1, q, m - 1)
        d_prev, d_cur = d_cur, d_prev

    starts = np.empty(k, dtype=np.int64)
    j = m - 1
    for q in range(k - 1, -1, -1):
        starts[q] = split_at[q, j]
        j = int(starts[q]) - 1
    sse = float(d_prev[m - 1])
    return starts, max(sse, 0.0)


def count_pairs(states, k):
    """Count adjacent (state, next-state) pairs into a k x k matrix."""
    states = np.ascontiguousarray(states, dtype=np.int64)
    if states.shape[0] < 2:
        return np.zeros((k, k), dtype=np.int64)
    flat = states[:-1] * k + states[1:]
    return np.bincount(flat, minlength=k * k).reshape(k, k).astype(np.int64)


def walk_chain(cum_rows, init_state, uniforms):
    """Walk a Markov chain by inverse CDF, one uniform per step.

    ``cum_rows`` is the row-wise inclusive cumulative transition matrix with
    the last column clamped to 1.0. Returns the full state path,
    ``len(uniforms) + 1`` entries starting at ``init_state``.
    """
    cum_rows = np.ascontiguousarray(cum_rows, dtype=np.float64)
    uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
    k = cum_rows.shape[0]
    n = uniforms.shape[0]
    out = np.empty(n + 1, dtype=np.int64)
    s = int(init_state)
    out[0] = s
    for t in range(n):
        u = uniforms[t]
        row = cum_rows[s]
        nxt = 0
        while nxt < k - 1 and row[nxt] < u:
            nxt += 1
        s = nxt
        out[t + 1] = s
    return out


def simulate_transition_counts(cum_rows, init_states, steps, rng):
    """Simulate many chains in lockstep and accumulate transition counts.

    One ``rng.random(n_trials)`` call per step, consumed in step order, so
    both backends see the same stream. Returns (n_trials, k, k) int64
    counts; each trial contributes exactly ``steps`` transitions.
    """
    cum_rows = np.ascontiguousarray(cum_rows, dtype=np.float64)
    states = np.ascontiguousarray(init_states, dtype=np.int64).copy()
    n_trials = states.shape[0]
    k = cum_rows.shape[0]
    counts = np.zeros((n_trials, k, k), dtype=np.int64)
    rows = np.arange(n_trials)
    for _ in range(steps):
        u = rng.random(n_trials)
        cs = cum_rows[states]
        nxt = (cs < u[:, None]).sum(axis=1)
        np.minimum(nxt, k - 1, out=nxt)
        np.add.at(counts, (rows, states, nxt), 1)
        states = nxt
    return counts

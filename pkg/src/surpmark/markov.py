"""First-order transition statistics over state sequences.

Counts are the primitive: raw transition counts accumulate per document
(never across document boundaries) and merge as a commutative monoid, so
corpora can be counted in parallel and combined in any order. Models derive
from counts by row normalization with no smoothing; rows that were never
visited stay flagged undefined rather than being imputed.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import backend
from .errors import (DimensionMismatch, NoTransitions, NotStochastic,
                     Reducible, StateOutOfRange)

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class TransitionCounts:
    """Raw k x k adjacent-pair counts for one or more state sequences."""

    k: int
    counts: np.ndarray  # (k, k) int64

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (self.k, self.k):
            raise DimensionMismatch(f"counts shape {c.shape} != ({self.k}, {self.k})")
        if (c < 0).any():
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "counts", c)

    @property
    def source_visits(self):
        """Per-state outgoing transition totals (length-k int64)."""
        return self.counts.sum(axis=1)

    @property
    def num_transitions(self):
        return int(self.counts.sum())

    def scaled(self, factor):
        """Counts multiplied by a positive integer; conditionals unchanged."""
        f = int(factor)
        if f < 1:
            raise ValueError("factor must be a positive integer")
        return TransitionCounts(self.k, self.counts * f)


@dataclass(frozen=True)
class TransitionModel:
    """Row-stochastic transition matrix with occupancy weights.

    ``matrix`` rows with zero visits are all-zero and flagged in
    ``row_defined``; ``occupancy`` is the empirical source-state frequency
    (zero exactly on undefined rows). ``stationary`` is attached on request.
    """

    k: int
    matrix: np.ndarray
    occupancy: np.ndarray
    row_defined: np.ndarray
    stationary: Optional[np.ndarray] = None


@dataclass(frozen=True)
class PairChain:
    """Markov chain on state pairs (s, a), indexed s * k + a.

    Row (s, a) has support only on pairs (a, a') with probability M(a'|a);
    its stationary distribution is pi(s) * M(a|s).
    """

    k: int
    matrix: np.ndarray           # (k*k, k*k)
    stationary_pairs: np.ndarray  # (k*k,)


def count_transitions(states, k):
    """Count adjacent pairs of a single sequence of states in {1..k}.

    Sequences shorter than 2 yield all-zero counts.
    """
    states = np.asarray(states, dtype=np.int64).ravel()
    k = int(k)
    bad = np.flatnonzero((states < 1) | (states > k))
    if bad.size:
        i = int(bad[0])
        raise StateOutOfRange(i, int(states[i]))
    return TransitionCounts(k, backend.count_pairs(states - 1, k))


def merge_counts(a, b):
    """Elementwise sum of two count matrices (associative, commutative)."""
    if a.k != b.k:
        raise DimensionMismatch(f"k mismatch: {a.k} != {b.k}")
    return TransitionCounts(a.k, a.counts + b.counts)


def to_model(c):
    """Row-normalize counts into a TransitionModel (no smoothing)."""
    total = c.num_transitions
    if total < 1:
        raise NoTransitions()
    visits = c.source_visits
    defined = visits > 0
    matrix = np.zeros((c.k, c.k))
    matrix[defined] = c.counts[defined] / visits[defined, None]
    occupancy = visits / total
    return TransitionModel(k=c.k, matrix=matrix, occupancy=occupancy,
                           row_defined=defined)


def _check_stochastic(matrix):
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"matrix shape {matrix.shape} is not square")
    if (matrix < -1e-15).any():
        raise NotStochastic("negative entries")
    rows = matrix.sum(axis=1)
    if np.abs(rows - 1.0).max() > ROW_SUM_TOL:
        raise NotStochastic(f"row sums deviate from 1 by {np.abs(rows - 1).max():.3g}")
    return matrix


def is_irreducible(matrix):
    """True when the positive-entry graph is strongly connected."""
    matrix = np.asarray(matrix, dtype=np.float64)
    n, _ = connected_components(csr_matrix(matrix > 0), directed=True,
                                connection="strong")
    return n == 1


def stationary_distribution(matrix):
    """Unique stationary distribution of an irreducible row-stochastic matrix.

    Solves pi^T (M - I) = 0 with the normalization constraint sum(pi) = 1 as
    a dense linear system (alphabets here are small, k <= ~256 for pair
    chains).
    """
    matrix = _check_stochastic(matrix)
    if not is_irreducible(matrix):
        raise Reducible("transition graph is not strongly connected")
    k = matrix.shape[0]
    a = matrix.T - np.eye(k)
    a[-1, :] = 1.0
    b = np.zeros(k)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def with_stationary(model):
    """Return a copy of the model with its stationary distribution attached."""
    pi = stationary_distribution(model.matrix)
    return TransitionModel(k=model.k, matrix=model.matrix,
                           occupancy=model.occupancy,
                           row_defined=model.row_defined, stationary=pi)


def pair_chain(model):
    """Lift a model (with stationary) to its chain on state pairs."""
    if model.stationary is None:
        model = with_stationary(model)
    k = model.k
    kk = k * k
    big = np.zeros((kk, kk))
    for s in range(k):
        for a in range(k):
            big[s * k + a, a * k: (a + 1) * k] = model.matrix[a]
    pairs = (model.stationary[:, None] * model.matrix).reshape(kk)
    return PairChain(k=k, matrix=big, stationary_pairs=pairs)

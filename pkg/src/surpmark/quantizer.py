"""Shared 1-D surprisal quantizer.

The quantizer partitions the surprisal axis into k states by exact 1-D
k-means (dynamic programming over the sorted values, not seeded Lloyd
iterations), so fitting is deterministic and reproducible. Boundaries sit at
centroid midpoints; a value exactly on a boundary goes to the upper bin
(half-open intervals), and values outside the training range clamp to the
extreme states.
"""

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import EmptyInput, NonFiniteValue, TooFewDistinctValues


@dataclass(frozen=True)
class Quantizer:
    """A fitted k-bin partition of the real line.

    Attributes
    ----------
    k : int
        Number of states.
    boundaries : tuple of float
        k-1 strictly ascending thresholds; state i covers
        [boundaries[i-2], boundaries[i-1]).
    centroids : tuple of float
        k strictly ascending cluster centers; boundaries are their midpoints.
    fitted_on : int
        Number of training values.
    """

    k: int
    boundaries: tuple
    centroids: tuple
    fitted_on: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        b = np.asarray(self.boundaries, dtype=np.float64)
        c = np.asarray(self.centroids, dtype=np.float64)
        if c.shape != (self.k,) or b.shape != (self.k - 1,):
            raise ValueError("boundary/centroid lengths inconsistent with k")
        if self.k > 1:
            if not np.all(np.diff(c) > 0):
                raise ValueError("centroids must be strictly ascending")
            if not (np.all(b > c[:-1]) and np.all(b < c[1:])):
                raise ValueError("each boundary must lie strictly between "
                                 "its neighbouring centroids")

    def to_dict(self):
        return {
            "k": self.k,
            "boundaries": [float(v) for v in self.boundaries],
            "centroids": [float(v) for v in self.centroids],
            "fitted_on": self.fitted_on,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(k=int(d["k"]), boundaries=tuple(d["boundaries"]),
                   centroids=tuple(d["centroids"]), fitted_on=int(d["fitted_on"]))


def _check_finite(values):
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NonFiniteValue(int(bad[0]))


def fit_quantizer(values, k):
    """Fit the globally optimal 1-D k-means partition.

    Duplicates are collapsed into weighted points before the dynamic
    program, so the fit is a pure function of the multiset of values.

    Raises
    ------
    EmptyInput, NonFiniteValue, TooFewDistinctValues
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise EmptyInput("no values to fit on")
    _check_finite(values)
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    uniq, counts = np.unique(values, return_counts=True)
    if uniq.size < k:
        raise TooFewDistinctValues(k, int(uniq.size))

    starts, _ = backend.kmeans_splits(uniq, counts.astype(np.float64), k)
    bounds = np.append(starts, uniq.size)
    centroids = np.empty(k)
    for q in range(k):
        seg = slice(bounds[q], bounds[q + 1])
        centroids[q] = np.average(uniq[seg], weights=counts[seg])
    boundaries = (centroids[:-1] + centroids[1:]) / 2.0
    return Quantizer(k=k, boundaries=tuple(boundaries.tolist()),
                     centroids=tuple(centroids.tolist()),
                     fitted_on=int(values.size))


def quantize(q, values):
    """Map values to states in {1..k} by nearest centroid.

    Ties at a boundary go to the upper bin; out-of-range values clamp to
    states 1 or k. Returns an int64 array of the same length.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    _check_finite(values)
    if values.size == 0:
        return np.empty(0, dtype=np.int64)
    b = np.asarray(q.boundaries, dtype=np.float64)
    return np.searchsorted(b, values, side="right").astype(np.int64) + 1


def default_bins(total_reference_transitions, scale=0.75, k_min=2, k_max=12):
    """Data-dependent default bin count: clamp(round(scale * N^(1/5))).

    The fifth-root growth balances resolution loss against count sparsity;
    the scale constant is calibrated so N around 60000 yields k = 7.
    """
    n = int(total_reference_transitions)
    if n < 1:
        raise ValueError("total_reference_transitions must be >= 1")
    k = int(round(scale * n ** 0.2))
    return max(k_min, min(k_max, k))

"""KL/GJS divergences between Markov summaries and the decision score.

Two GJS modes exist. The canonical *joint* mode weights each argument's rows
by that argument's own empirical occupancy and forms the mixture on the
joint pair distributions; this is the unique definition under which the
decision score equals the conditional-entropy form exactly on count data
(see ``entropy_form_delta``). The *constant-mix* display mode mixes rows
with a constant weight and aggregates with caller-supplied row weights; it
coincides with joint mode when both occupancies equal those weights, and is
kept for ablation.

A breakdown carries both scales of the divergence: ``total`` is the
normalized value, weights (alpha/(1+alpha), 1/(1+alpha)), bounded by the
binary entropy of the mixture weight and hence by log 2; ``scaled`` is the
(alpha, 1)-weighted value, which is the likelihood-ratio scale the decision
score lives on. Natural logarithms throughout.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DimensionMismatch, NonFinite, NoTransitions,
                     SequenceTooShort, UndefinedRow)
from .markov import TransitionCounts, count_transitions, merge_counts, to_model

PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class JointPairDistribution:
    """Distribution over state pairs (s, a): entry = occupancy(s) * M(a|s)."""

    k: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.shape != (self.k, self.k):
            raise DimensionMismatch(f"probs shape {p.shape} != ({self.k}, {self.k})")
        if (p < 0).any():
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum():.12g}, expected 1")
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_counts(cls, c):
        total = c.num_transitions
        if total < 1:
            raise NoTransitions()
        return cls(k=c.k, probs=c.counts / total)

    @classmethod
    def from_model(cls, model):
        return cls(k=model.k, probs=model.occupancy[:, None] * model.matrix)


@dataclass(frozen=True)
class GjsBreakdown:
    """One GJS evaluation: weighted KL components plus both scalings."""

    total: float       # (alpha/(1+alpha)) * kl_first + (1/(1+alpha)) * kl_second
    kl_first: float    # occupancy-weighted conditional KL of the first argument to the mixture
    kl_second: float
    alpha: float
    mode: str          # "joint" or "constant_mix"

    @property
    def scaled(self):
        """(alpha, 1)-weighted value: the likelihood-ratio score scale."""
        return self.alpha * self.kl_first + self.kl_second


def binary_entropy(w):
    """H(w) in nats; upper bound of the normalized GJS at mixture weight w."""
    if w <= 0.0 or w >= 1.0:
        return 0.0
    return -(w * math.log(w) + (1.0 - w) * math.log(1.0 - w))


def _masked_cond_kl(num_joint, num_row, den_joint, den_row):
    """Sum of num(s,a) * log(num_cond / den_cond) over the support of num."""
    mask = num_joint > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mask,
                         num_joint * den_row[:, None] / (num_row[:, None] * den_joint),
                         1.0)
        terms = np.where(mask, num_joint * np.log(ratio), 0.0)
    val = float(terms.sum())
    if not math.isfinite(val):
        raise NonFinite("KL term is not finite")
    return max(val, 0.0)


def gjs_joint(a, b, alpha):
    """GJS between two joint pair distributions with mixture weight alpha.

    The mixture joint (alpha*A + B)/(1+alpha) has support wherever A or B
    does, so every log argument is finite; 0*log(0/x) terms contribute 0.
    """
    if a.k != b.k:
        raise DimensionMismatch(f"k mismatch: {a.k} != {b.k}")
    alpha = float(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    row_a = a.probs.sum(axis=1)
    row_b = b.probs.sum(axis=1)
    mix = (alpha * a.probs + b.probs) / (1.0 + alpha)
    row_mix = (alpha * row_a + row_b) / (1.0 + alpha)
    kl_first = _masked_cond_kl(a.probs, row_a, mix, row_mix)
    kl_second = _masked_cond_kl(b.probs, row_b, mix, row_mix)
    w = alpha / (1.0 + alpha)
    return GjsBreakdown(total=w * kl_first + (1.0 - w) * kl_second,
                        kl_first=kl_first, kl_second=kl_second,
                        alpha=alpha, mode="joint")


def gjs_constant_mix(ma, mb, weights, alpha):
    """Display-form GJS: rows mixed with constant weight alpha/(1+alpha).

    Per-row KL terms are aggregated with the supplied weights; rows with
    zero weight are skipped. A positive-weight row must be defined in both
    models.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if ma.k != mb.k or weights.shape != (ma.k,):
        raise DimensionMismatch("model/weight dimensions disagree")
    if (weights < 0).any():
        raise ValueError("weights must be nonnegative")
    alpha = float(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    active = weights > 0
    for side in (ma, mb):
        undefined = active & ~side.row_defined
        if undefined.any():
            raise UndefinedRow(int(np.flatnonzero(undefined)[0]) + 1)

    w = alpha / (1.0 + alpha)
    mix = w * ma.matrix + (1.0 - w) * mb.matrix

    def row_kl(num):
        mask = (num > 0) & active[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(mask, num * np.log(np.where(mask, num / mix, 1.0)), 0.0)
        return (terms * weights[:, None]).sum(axis=1)

    kl_first = float(row_kl(ma.matrix).sum())
    kl_second = float(row_kl(mb.matrix).sum())
    if not (math.isfinite(kl_first) and math.isfinite(kl_second)):
        raise NonFinite("KL term is not finite")
    kl_first = max(kl_first, 0.0)
    kl_second = max(kl_second, 0.0)
    return GjsBreakdown(total=w * kl_first + (1.0 - w) * kl_second,
                        kl_first=kl_first, kl_second=kl_second,
                        alpha=alpha, mode="constant_mix")


@dataclass(frozen=True)
class DeltaParts:
    """Decision score plus the two GJS evaluations it is built from."""

    score: float
    to_first: GjsBreakdown
    to_second: GjsBreakdown
    alpha_first: float
    alpha_second: float


def _one_side(ref, test, alpha, mode):
    if mode == "joint":
        return gjs_joint(JointPairDistribution.from_counts(ref),
                         JointPairDistribution.from_counts(test), alpha)
    if mode == "constant_mix":
        ref_m = to_model(ref)
        test_m = to_model(test)
        weights = np.where(ref_m.row_defined, test_m.occupancy, 0.0)
        return gjs_constant_mix(ref_m, test_m, weights, alpha)
    raise ValueError(f"unknown mode {mode!r}")


def delta_gjs_parts(ref_p, ref_q, test, mode="joint", alpha_mode="per-side"):
    """Score a test against two references; see ``delta_gjs``."""
    if not (ref_p.k == ref_q.k == test.k):
        raise DimensionMismatch("references and test must share k")
    n = test.num_transitions
    if n < 1:
        raise NoTransitions("test")
    n_p = ref_p.num_transitions
    n_q = ref_q.num_transitions
    if n_p < 1:
        raise NoTransitions("first reference")
    if n_q < 1:
        raise NoTransitions("second reference")
    if alpha_mode == "per-side":
        alpha_p = n_p / n
        alpha_q = n_q / n
    elif alpha_mode == "single":
        alpha_p = alpha_q = (n_p + n_q) / (2.0 * n)
    else:
        raise ValueError(f"unknown alpha_mode {alpha_mode!r}")
    bk_p = _one_side(ref_p, test, alpha_p, mode)
    bk_q = _one_side(ref_q, test, alpha_q, mode)
    return DeltaParts(score=bk_p.scaled - bk_q.scaled,
                      to_first=bk_p, to_second=bk_q,
                      alpha_first=alpha_p, alpha_second=alpha_q)


def delta_gjs(ref_p, ref_q, test, mode="joint", alpha_mode="per-side"):
    """GJS gap of the test to reference P minus to reference Q.

    Negative values are evidence that the test shares its source with P
    (the machine side in the detector), positive with Q. In joint mode with
    per-side alpha the value is exactly the conditional-entropy form below.
    """
    return delta_gjs_parts(ref_p, ref_q, test, mode=mode,
                           alpha_mode=alpha_mode).score


def conditional_entropy(c):
    """Empirical conditional entropy per transition, in nats."""
    total = c.num_transitions
    if total < 1:
        raise NoTransitions()
    counts = c.counts
    visits = c.source_visits
    mask = counts > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(mask,
                         counts * np.log(np.where(mask, counts / visits[:, None], 1.0)),
                         0.0)
    return max(-float(terms.sum()) / total, 0.0)


def entropy_form_delta_counts(c_p, c_q, c_t):
    """Entropy form of the decision score, on count matrices.

    Pooling never introduces a cross-boundary transition: the pooled counts
    are the elementwise sum, which is what makes this form identical to the
    joint-mode, per-side-alpha GJS gap.
    """
    if not (c_p.k == c_q.k == c_t.k):
        raise DimensionMismatch("counts must share k")
    n = c_t.num_transitions
    n_p = c_p.num_transitions
    n_q = c_q.num_transitions
    if min(n, n_p, n_q) < 1:
        raise NoTransitions()
    h = conditional_entropy
    side_p = ((n_p + n) / n) * h(merge_counts(c_p, c_t)) - (n_p / n) * h(c_p)
    side_q = ((n_q + n) / n) * h(merge_counts(c_q, c_t)) - (n_q / n) * h(c_q)
    return side_p - side_q


def entropy_form_delta(states_p, states_q, states_t, k):
    """Entropy form of the decision score, on raw state sequences."""
    seqs = []
    for name, seq in (("P", states_p), ("Q", states_q), ("T", states_t)):
        seq = np.asarray(seq)
        if seq.size < 2:
            raise SequenceTooShort(f"sequence {name} has fewer than 2 states")
        seqs.append(seq)
    c_p, c_q, c_t = (count_transitions(s, k) for s in seqs)
    return entropy_form_delta_counts(c_p, c_q, c_t)

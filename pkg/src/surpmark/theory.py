"""Distributional theory of the decision score, made executable.

Population GJS and its information-density expansion, asymptotic mean and
variance of the score via the resolvent (fundamental-matrix) solution of the
Poisson equation on the pair chain, Monte Carlo normality validation, and
the bin-count bias/variance sweep against a fine-grid ground truth.

The resolvent limit ((1+eps)I - M)^{-1} applied to a centered function
equals the fundamental-matrix solve (I - M + 1 pi^T)^{-1}, which is exact for
finite chains; that is how the long-run variances are computed here.
"""

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import kolmogi, ndtr
from scipy.stats import kstest, skew

from . import backend
from ._rng import (STREAM_MC_REF_P, STREAM_MC_REF_Q, STREAM_MC_TEST,
                   STREAM_SWEEP, make_rng)
from .divergence import JointPairDistribution, delta_gjs_parts, gjs_joint
from .errors import DimensionMismatch, NonFinite, Reducible, SingularSolve
from .markov import TransitionCounts, is_irreducible, stationary_distribution
from .quantizer import fit_quantizer, quantize
from .synth import row_cumsum, sample_surprisals

HYPOTHESES = ("H0", "H1")


@dataclass(frozen=True)
class InfoDensities:
    """Log-ratios of each conditional to the alpha-mixture conditional.

    Entries where the numerator conditional is zero are -inf sentinels;
    they always carry zero weight in the sums that consume them.
    """

    iota1: np.ndarray
    iota2: np.ndarray
    alpha: float


@dataclass(frozen=True)
class MomentsPrediction:
    """Asymptotic mean and variance of the decision score.

    ``sigma1_sq``/``sigma2_sq`` are per-step long-run variances of the
    reference-side and test-side information-density sums; the score
    variance composes as (alpha * sigma1_sq + sigma2_sq) / n.
    """

    hypothesis: str
    mu: float
    var: float
    sigma1_sq: float
    sigma2_sq: float
    alpha: float


@dataclass(frozen=True)
class McResult:
    """Monte Carlo sample of decision scores with moment summary."""

    samples: np.ndarray
    mean: float
    variance: float
    skewness: float


def _as_stochastic(m, name):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} is not square")
    return m


def information_densities(m1, m2, alpha):
    """Elementwise information densities of the pair (m1, m2) at alpha."""
    m1 = _as_stochastic(m1, "m1")
    m2 = _as_stochastic(m2, "m2")
    if m1.shape != m2.shape:
        raise DimensionMismatch(f"shapes {m1.shape} and {m2.shape} disagree")
    alpha = float(alpha)
    mix = (alpha * m1 + m2) / (1.0 + alpha)

    def dens(num):
        # iota = log((1+alpha) num / (alpha m1 + m2)) = log(num / mix)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(num > 0, np.log(num) - np.log(mix), -np.inf)
        return out

    return InfoDensities(iota1=dens(m1), iota2=dens(m2), alpha=alpha)


def population_gjs(m1, m2, alpha, pi1, pi2):
    """(alpha, 1)-weighted GJS between chains with given row weights.

    Equals alpha * sum_s pi1(s) sum_a m1(a|s) iota1(a|s)
         +         sum_s pi2(s) sum_a m2(a|s) iota2(a|s).
    """
    pi1 = np.asarray(pi1, dtype=np.float64)
    pi2 = np.asarray(pi2, dtype=np.float64)
    dens = information_densities(m1, m2, alpha)
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    if pi1.shape != (m1.shape[0],) or pi2.shape != (m2.shape[0],):
        raise DimensionMismatch("weight lengths disagree with the matrices")

    def side(pi, m, iota):
        terms = np.where(m > 0, m * np.where(m > 0, iota, 0.0), 0.0)
        return float((pi[:, None] * terms).sum())

    val = float(alpha) * side(pi1, m1, dens.iota1) + side(pi2, m2, dens.iota2)
    if not math.isfinite(val):
        raise NonFinite("population GJS is not finite")
    return max(val, 0.0)


def asymptotic_variance(matrix, f, pi=None):
    """Long-run variance per step of sum f(X_t) on an ergodic chain.

    Centers f and evaluates 2 <g, f~>_pi - ||f~||^2_pi with g the
    fundamental-matrix solution of the Poisson equation.
    """
    matrix = _as_stochastic(matrix, "matrix")
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (matrix.shape[0],):
        raise DimensionMismatch("f must assign one value per state")
    if not np.isfinite(f).all():
        raise NonFinite("f must be finite on every state")
    if pi is None:
        pi = stationary_distribution(matrix)
    else:
        pi = np.asarray(pi, dtype=np.float64)
        if not is_irreducible(matrix):
            raise Reducible("chain is not irreducible")
    centered = f - float(np.dot(pi, f))
    a = np.eye(matrix.shape[0]) - matrix + np.outer(np.ones_like(pi), pi)
    try:
        g = np.linalg.solve(a, centered)
    except np.linalg.LinAlgError as exc:
        raise SingularSolve(str(exc)) from exc
    sigma_sq = 2.0 * float(np.dot(pi, g * centered)) - float(np.dot(pi, centered ** 2))
    if not math.isfinite(sigma_sq):
        raise SingularSolve("variance solve produced a non-finite value")
    if sigma_sq < -1e-10:
        raise SingularSolve(f"variance solve produced {sigma_sq:.3g} < 0")
    return max(sigma_sq, 0.0)


def _pair_long_run_variance(m, pi, f_matrix):
    """Long-run variance of sum f(s_t, s_{t+1}) along chain m.

    Built on the chain over pairs (s, a), restricted to its support so the
    solve stays irreducible even when m has structural zeros.
    """
    k = m.shape[0]
    support = [(s, a) for s in range(k) for a in range(k) if m[s, a] > 0]
    index = {pair: i for i, pair in enumerate(support)}
    size = len(support)
    big = np.zeros((size, size))
    for (s, a), i in index.items():
        for a2 in range(k):
            if m[a, a2] > 0:
                big[i, index[(a, a2)]] = m[a, a2]
    pi_pairs = np.array([pi[s] * m[s, a] for s, a in support])
    pi_pairs = pi_pairs / pi_pairs.sum()
    f = np.array([f_matrix[s, a] for s, a in support])
    if not np.isfinite(f).all():
        raise NonFinite("information density is not finite on the chain support")
    return asymptotic_variance(big, f, pi_pairs)


def theoretical_moments(m_p, m_q, n_ref, n_test, hypothesis):
    """Predicted mean/variance of the decision score under a hypothesis.

    Under H0 (test drawn from P) the mean is -GJS(m_q, m_p, alpha) and the
    fluctuations come from the Q-reference side (via iota1 of (m_q, m_p))
    and the test side (via iota2); under H1 the roles mirror. alpha is
    n_ref / n_test.
    """
    m_p = _as_stochastic(m_p, "m_p")
    m_q = _as_stochastic(m_q, "m_q")
    if hypothesis not in HYPOTHESES:
        raise ValueError(f"hypothesis must be one of {HYPOTHESES}")
    alpha = n_ref / n_test
    pi_p = stationary_distribution(m_p)
    pi_q = stationary_distribution(m_q)
    if hypothesis == "H0":
        dens = information_densities(m_q, m_p, alpha)
        mu = -population_gjs(m_q, m_p, alpha, pi_q, pi_p)
        sigma1_sq = _pair_long_run_variance(m_q, pi_q, dens.iota1)
        sigma2_sq = _pair_long_run_variance(m_p, pi_p, dens.iota2)
    else:
        dens = information_densities(m_p, m_q, alpha)
        mu = population_gjs(m_p, m_q, alpha, pi_p, pi_q)
        sigma1_sq = _pair_long_run_variance(m_p, pi_p, dens.iota1)
        sigma2_sq = _pair_long_run_variance(m_q, pi_q, dens.iota2)
    var = (alpha * sigma1_sq + sigma2_sq) / n_test
    return MomentsPrediction(hypothesis=hypothesis, mu=mu, var=var,
                             sigma1_sq=sigma1_sq, sigma2_sq=sigma2_sq,
                             alpha=alpha)


def _stationary_inits(matrix, trials, rng):
    pi = stationary_distribution(matrix)
    cum = np.cumsum(pi)
    cum[-1] = 1.0
    inits = np.searchsorted(cum, rng.random(trials), side="right")
    return np.minimum(inits, matrix.shape[0] - 1).astype(np.int64)


def mc_delta_gjs(m_p, m_q, n_ref, n_test, trials, seed, hypothesis):
    """Monte Carlo sample of the decision score under one hypothesis.

    Each trial draws fresh reference sequences of ``n_ref`` transitions from
    both chains (stationary start) and a test sequence of ``n_test``
    transitions from the hypothesis source, then scores with the joint-mode,
    per-side-alpha gap. Bit-reproducible for fixed (seed, parameters).
    """
    m_p = _as_stochastic(m_p, "m_p")
    m_q = _as_stochastic(m_q, "m_q")
    if hypothesis not in HYPOTHESES:
        raise ValueError(f"hypothesis must be one of {HYPOTHESES}")
    if min(n_ref, n_test, trials) < 1:
        raise ValueError("n_ref, n_test and trials must be positive")
    k = m_p.shape[0]
    hyp_id = HYPOTHESES.index(hypothesis)
    m_t = m_p if hypothesis == "H0" else m_q

    runs = ((m_p, STREAM_MC_REF_P, n_ref), (m_q, STREAM_MC_REF_Q, n_ref),
            (m_t, STREAM_MC_TEST, n_test))
    counts = []
    for matrix, stream, steps in runs:
        rng = make_rng(seed, stream, hyp_id)
        inits = _stationary_inits(matrix, trials, rng)
        counts.append(backend.simulate_transition_counts(
            row_cumsum(matrix), inits, steps, rng))
    counts_p, counts_q, counts_t = counts

    samples = np.empty(trials)
    for i in range(trials):
        samples[i] = delta_gjs_parts(
            TransitionCounts(k, counts_p[i]),
            TransitionCounts(k, counts_q[i]),
            TransitionCounts(k, counts_t[i])).score
    variance = float(samples.var(ddof=1)) if trials > 1 else 0.0
    return McResult(samples=samples, mean=float(samples.mean()),
                    variance=variance, skewness=float(skew(samples)))


def normality_report(samples, ks_level=0.01):
    """Shape diagnostics of a score sample against the normal family.

    Standardizes by the sample mean/std and reports skewness plus the
    Kolmogorov-Smirnov statistic with its asymptotic critical value.
    (Estimated parameters make the critical value conservative.)
    """
    samples = np.asarray(samples, dtype=np.float64)
    standardized = (samples - samples.mean()) / samples.std(ddof=1)
    ks_stat = float(kstest(standardized, "norm").statistic)
    crit = float(kolmogi(ks_level)) / math.sqrt(samples.size)
    sk = float(skew(samples))
    return {
        "n": int(samples.size),
        "skewness": sk,
        "ks_stat": ks_stat,
        "ks_critical": crit,
        "ks_level": ks_level,
        "normal": bool(abs(sk) < 0.2 and ks_stat < crit),
    }


# --- bin-count trade-off sweep ----------------------------------------------

def fine_grid_boundaries(spec_a, spec_b, bins=256):
    """Fixed equal-width grid covering both sources' emissions (+/- 8 sd)."""
    means = np.concatenate([spec_a.means, spec_b.means])
    stds = np.concatenate([spec_a.stds, spec_b.stds])
    lo = means.min() - 8.0 * stds.max()
    hi = means.max() + 8.0 * stds.max()
    return np.linspace(lo, hi, bins + 1)[1:-1]


def induced_joint(spec, boundaries):
    """Population pair distribution of a Gaussian-emission source on bins.

    With hidden chain (pi, M) and per-state emission masses phi_h(bin), the
    joint mass of (bin i, bin j) is sum_{h,h'} pi_h M(h'|h) phi_h(i)
    phi_{h'}(j); exact because consecutive emissions are conditionally
    independent given the hidden states.
    """
    boundaries = np.asarray(boundaries, dtype=np.float64)
    pi = stationary_distribution(spec.chain.matrix)
    edges = np.concatenate([[-np.inf], boundaries, [np.inf]])
    cdf = ndtr((edges[None, :] - spec.means[:, None]) / spec.stds[:, None])
    phi = np.diff(cdf, axis=1)  # (k_hidden, n_bins)
    joint = phi.T @ (pi[:, None] * spec.chain.matrix) @ phi
    joint = np.clip(joint, 0.0, None)
    return JointPairDistribution(k=phi.shape[1], probs=joint / joint.sum())


@dataclass(frozen=True)
class SweepRow:
    n_reference: int
    k: int
    trial_count: int
    mean_abs_error: float
    argmin_flag: int


@dataclass(frozen=True)
class SweepResult:
    rows: list
    argmin_by_n: dict
    ground_truth: float
    fine_bins: int

    def errors_for(self, n_reference):
        return {row.k: row.mean_abs_error for row in self.rows
                if row.n_reference == n_reference}


def k_tradeoff_sweep(spec_a, spec_b, n_values, k_values, trials, seed,
                     fine_bins=256):
    """Total estimation error of the k-bin GJS against a fine-grid truth.

    For each reference size N and bin count k: sample N-transition
    pseudo-surprisal sequences from both sources, fit the shared k-bin
    quantizer on the pooled values, and compare the empirical GJS (alpha=1,
    joint mode, normalized scale) to the 256-bin population value. Samples
    are shared across k within a trial, so the k-profiles are paired.
    """
    n_values = [int(v) for v in n_values]
    k_values = [int(v) for v in k_values]
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    fine = fine_grid_boundaries(spec_a, spec_b, fine_bins)
    truth = gjs_joint(induced_joint(spec_a, fine),
                      induced_joint(spec_b, fine), 1.0).total

    rows = []
    argmin_by_n = {}
    for n_ref in n_values:
        totals = {k: 0.0 for k in k_values}
        for trial in range(trials):
            rng_a = make_rng(seed, STREAM_SWEEP, n_ref, trial, 0)
            rng_b = make_rng(seed, STREAM_SWEEP, n_ref, trial, 1)
            sample_a = sample_surprisals(spec_a, n_ref + 1, rng_a)
            sample_b = sample_surprisals(spec_b, n_ref + 1, rng_b)
            pooled = np.concatenate([sample_a, sample_b])
            for k in k_values:
                q = fit_quantizer(pooled, k)
                c_a = backend.count_pairs(quantize(q, sample_a) - 1, k)
                c_b = backend.count_pairs(quantize(q, sample_b) - 1, k)
                est = gjs_joint(
                    JointPairDistribution.from_counts(TransitionCounts(k, c_a)),
                    JointPairDistribution.from_counts(TransitionCounts(k, c_b)),
                    1.0).total
                totals[k] += abs(est - truth)
        errors = {k: totals[k] / trials for k in k_values}
        best_k = min(errors, key=lambda k: (errors[k], k))
        argmin_by_n[n_ref] = best_k
        for k in k_values:
            rows.append(SweepRow(n_reference=n_ref, k=k, trial_count=trials,
                                 mean_abs_error=errors[k],
                                 argmin_flag=int(k == best_k)))
    return SweepResult(rows=rows, argmin_by_n=argmin_by_n,
                       ground_truth=float(truth), fine_bins=fine_bins)


def write_sweep_outputs(result, csv_path, json_path):
    """CSV (one row per (N, k)) plus a JSON summary for plotting."""
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n_reference", "k", "trial_count",
                         "mean_abs_error", "argmin_flag"])
        for row in result.rows:
            writer.writerow([row.n_reference, row.k, row.trial_count,
                             repr(row.mean_abs_error), row.argmin_flag])
    summary = {
        "argmin_by_n": {str(n): k for n, k in result.argmin_by_n.items()},
        "ground_truth": result.ground_truth,
        "fine_bins": result.fine_bins,
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")


def estimation_error(m_p, m_q, n_ref, replicates, seed):
    """Mean |empirical - population| GJS between two chains at length N.

    Both sequences carry ``n_ref`` transitions (alpha = 1); the normalized
    joint-mode scale is used on both sides of the comparison.
    """
    m_p = _as_stochastic(m_p, "m_p")
    m_q = _as_stochastic(m_q, "m_q")
    k = m_p.shape[0]
    pi_p = stationary_distribution(m_p)
    pi_q = stationary_distribution(m_q)
    pop = gjs_joint(JointPairDistribution(k, pi_p[:, None] * m_p),
                    JointPairDistribution(k, pi_q[:, None] * m_q), 1.0).total
    errors = np.empty(replicates)
    for rep in range(replicates):
        counts = []
        for role, matrix in ((0, m_p), (1, m_q)):
            rng = make_rng(seed, STREAM_SWEEP, 7, n_ref, rep, role)
            inits = _stationary_inits(matrix, 1, rng)
            counts.append(backend.simulate_transition_counts(
                row_cumsum(matrix), inits, n_ref, rng)[0])
        est = gjs_joint(
            JointPairDistribution.from_counts(TransitionCounts(k, counts[0])),
            JointPairDistribution.from_counts(TransitionCounts(k, counts[1])),
            1.0).total
        errors[rep] = abs(est - pop)
    return float(errors.mean())

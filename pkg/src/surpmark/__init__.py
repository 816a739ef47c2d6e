"""SurpMark: reference-based machine-text detection over surprisal dynamics.

Quantize token surprisals into k states, summarize each text by its
first-order state-transition statistics, and score it by the generalized
Jensen-Shannon gap to fixed human and machine references. Ships with a
theory lab that validates the score's likelihood-ratio identity and
asymptotic normality on synthetic Markov sources.
"""

from .backend import BACKEND
from .detector import (ReferencePack, ScoreFailure, ScoreReport,
                       SurprisalRecord, build_references, calibrate_tau,
                       load_pack, read_records, save_pack, score_batch,
                       score_text, write_records)
from .divergence import (GjsBreakdown, JointPairDistribution, binary_entropy,
                         conditional_entropy, delta_gjs, delta_gjs_parts,
                         entropy_form_delta, gjs_constant_mix, gjs_joint)
from .errors import SurpMarkError
from .evaluation import EvalResult, auroc, run_experiment, throughput_bench
from .markov import (PairChain, TransitionCounts, TransitionModel,
                     count_transitions, merge_counts, pair_chain,
                     stationary_distribution, to_model, with_stationary)
from .quantizer import Quantizer, default_bins, fit_quantizer, quantize
from .synth import (ChainSpec, EmissionSpec, NgramLM, fit_ngram_lm,
                    ngram_surprisals, sample_chain, sample_surprisals)
from .theory import (InfoDensities, McResult, MomentsPrediction,
                     asymptotic_variance, information_densities,
                     k_tradeoff_sweep, mc_delta_gjs, normality_report,
                     population_gjs, theoretical_moments)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChainSpec",
    "EmissionSpec",
    "EvalResult",
    "GjsBreakdown",
    "InfoDensities",
    "JointPairDistribution",
    "McResult",
    "MomentsPrediction",
    "NgramLM",
    "PairChain",
    "Quantizer",
    "ReferencePack",
    "ScoreFailure",
    "ScoreReport",
    "SurpMarkError",
    "SurprisalRecord",
    "TransitionCounts",
    "TransitionModel",
    "asymptotic_variance",
    "auroc",
    "binary_entropy",
    "build_references",
    "calibrate_tau",
    "conditional_entropy",
    "count_transitions",
    "default_bins",
    "delta_gjs",
    "delta_gjs_parts",
    "entropy_form_delta",
    "fit_ngram_lm",
    "fit_quantizer",
    "gjs_constant_mix",
    "gjs_joint",
    "information_densities",
    "k_tradeoff_sweep",
    "load_pack",
    "mc_delta_gjs",
    "merge_counts",
    "ngram_surprisals",
    "normality_report",
    "pair_chain",
    "population_gjs",
    "quantize",
    "read_records",
    "run_experiment",
    "sample_chain",
    "sample_surprisals",
    "save_pack",
    "score_batch",
    "score_text",
    "stationary_distribution",
    "theoretical_moments",
    "throughput_bench",
    "to_model",
    "with_stationary",
    "write_records",
]

"""AUROC metric, experiment harness, and throughput benchmarking.

The experiment runner reproduces the evaluation protocol at desk scale:
build a pack from reference corpora (real JSONL or synthetic sources),
score a test set, and emit plot-ready CSV. Results depend only on
(config, seed); wall-clock timings go to a sidecar file so the results CSV
is byte-reproducible.
"""

import csv
import json
import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from . import backend, detector
from ._rng import STREAM_EXPERIMENT, make_rng
from .errors import ConfigError, EmptyClass, SurpMarkError
from .synth import EmissionSpec, sample_surprisals

QUANTILE_POINTS = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class EvalResult:
    """AUROC with per-class score summaries; human is the positive class."""

    auroc: float
    n_positive: int
    n_negative: int
    score_summary: dict


def _summary(scores):
    scores = np.asarray(scores, dtype=np.float64)
    return {
        "mean": float(scores.mean()),
        "stddev": float(scores.std(ddof=1)) if scores.size > 1 else 0.0,
        "quantiles": {str(p): float(np.quantile(scores, p))
                      for p in QUANTILE_POINTS},
    }


def auroc(scores_human, scores_machine):
    """Mann-Whitney AUROC with half-credit for ties.

    Human is the positive class: under the sign convention (score <= tau
    means machine) human scores are the larger ones, so this is
    P(human > machine) + 0.5 P(equal).
    """
    h = np.asarray(scores_human, dtype=np.float64)
    m = np.asarray(scores_machine, dtype=np.float64)
    if h.size == 0:
        raise EmptyClass("human")
    if m.size == 0:
        raise EmptyClass("machine")
    ranks = rankdata(np.concatenate([h, m]))
    u = ranks[:h.size].sum() - h.size * (h.size + 1) / 2.0
    return EvalResult(auroc=float(u / (h.size * m.size)),
                      n_positive=int(h.size), n_negative=int(m.size),
                      score_summary={"human": _summary(h),
                                     "machine": _summary(m)})


# --- experiment harness -----------------------------------------------------

CORPUS_ROLES = ("ref_human", "ref_machine", "test_human", "test_machine")


def _load_corpus(role, spec, seed):
    if not isinstance(spec, dict):
        raise ConfigError(f"corpora.{role}", "expected an object")
    if "file" in spec:
        return detector.read_records(spec["file"])
    if "synthetic" in spec:
        syn = spec["synthetic"]
        for field in ("emission", "docs", "length"):
            if field not in syn:
                raise ConfigError(f"corpora.{role}.synthetic.{field}", "missing")
        emission = EmissionSpec.from_dict(syn["emission"])
        docs = int(syn["docs"])
        length = int(syn["length"])
        if docs < 1 or length < 2:
            raise ConfigError(f"corpora.{role}.synthetic",
                              "docs must be >= 1 and length >= 2")
        label = "human" if "human" in role else "machine"
        role_id = CORPUS_ROLES.index(role)
        records = []
        for i in range(docs):
            rng = make_rng(seed, STREAM_EXPERIMENT, role_id, i)
            values = sample_surprisals(emission, length, rng)
            records.append(detector.SurprisalRecord(
                id=f"{role}-{i}", surprisals=values, label=label))
        return records
    raise ConfigError(f"corpora.{role}", "needs either 'file' or 'synthetic'")


def _subsample(records, size, seed, cell_id):
    if size is None or size >= len(records):
        return list(records)
    rng = make_rng(seed, STREAM_EXPERIMENT, 1000, cell_id)
    idx = rng.permutation(len(records))[:size]
    return [records[i] for i in sorted(idx)]


def _truncate(record, length):
    if length is None or len(record.surprisals) <= length:
        return record
    return detector.SurprisalRecord(id=record.id,
                                    surprisals=record.surprisals[:length],
                                    label=record.label)


def run_experiment(config, out_dir):
    """Run a detection sweep; see README for the config schema.

    Writes ``results.csv`` (k, n_ref_samples, test_length, auroc; fully
    deterministic given config and seed), ``timings.csv`` (wall clock,
    machine-dependent), and ``manifest.json`` (full config echo).
    Returns the results path.
    """
    import os

    if "seed" not in config or not isinstance(config["seed"], int):
        raise ConfigError("seed", "an integer seed is required")
    seed = config["seed"]
    corpora_cfg = config.get("corpora")
    if not isinstance(corpora_cfg, dict):
        raise ConfigError("corpora", "expected an object with the four roles")
    for role in CORPUS_ROLES:
        if role not in corpora_cfg:
            raise ConfigError(f"corpora.{role}", "missing")
    k_cfg = config.get("k", None)
    k_values = k_cfg if isinstance(k_cfg, list) else [k_cfg]
    if not all(v is None or isinstance(v, int) for v in k_values):
        raise ConfigError("k", "expected an integer, a list of integers, or null")
    ref_sizes = config.get("ref_sizes", [None])
    test_lengths = config.get("test_lengths", [None])
    mode = config.get("mode", "joint")
    alpha_mode = config.get("alpha_mode", "per-side")

    corpora = {role: _load_corpus(role, corpora_cfg[role], seed)
               for role in CORPUS_ROLES}

    results = []
    timings = []
    cell_id = 0
    for ref_size in ref_sizes:
        ref_human = _subsample(corpora["ref_human"], ref_size, seed, cell_id)
        ref_machine = _subsample(corpora["ref_machine"], ref_size, seed,
                                 cell_id + 1)
        cell_id += 2
        for k in k_values:
            t0 = time.perf_counter()
            pack = detector.build_references(ref_human, ref_machine, k)
            for test_length in test_lengths:
                t1 = time.perf_counter()
                scores = {}
                for side in ("human", "machine"):
                    docs = [_truncate(d, test_length)
                            for d in corpora[f"test_{side}"]]
                    reports = detector.score_batch(pack, docs, mode=mode,
                                                   alpha_mode=alpha_mode)
                    bad = [r for r in reports
                           if isinstance(r, detector.ScoreFailure)]
                    if bad:
                        raise SurpMarkError(
                            f"test_{side}: {len(bad)} docs failed to score, "
                            f"first: {bad[0].error}")
                    scores[side] = [r.delta_gjs for r in reports]
                result = auroc(scores["human"], scores["machine"])
                elapsed_ms = (time.perf_counter() - t1) * 1e3
                build_ms = (t1 - t0) * 1e3
                n_ref = min(len(ref_human), len(ref_machine))
                results.append({
                    "k": pack.k,
                    "n_ref_samples": n_ref,
                    "test_length": "full" if test_length is None else test_length,
                    "auroc": result.auroc,
                })
                timings.append({
                    "k": pack.k,
                    "n_ref_samples": n_ref,
                    "test_length": "full" if test_length is None else test_length,
                    "build_ms": build_ms,
                    "score_ms": elapsed_ms,
                })

    os.makedirs(out_dir, exist_ok=True)
    results_path = os.path.join(out_dir, "results.csv")
    with open(results_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "n_ref_samples", "test_length", "auroc"])
        for row in results:
            writer.writerow([row["k"], row["n_ref_samples"],
                             row["test_length"], repr(row["auroc"])])
    with open(os.path.join(out_dir, "timings.csv"), "w", encoding="utf-8",
              newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "n_ref_samples", "test_length", "build_ms",
                         "score_ms"])
        for row in timings:
            writer.writerow([row["k"], row["n_ref_samples"],
                             row["test_length"], f"{row['build_ms']:.3f}",
                             f"{row['score_ms']:.3f}"])
    manifest = {"config": config, "seed": seed,
                "results": "results.csv", "timings": "timings.csv"}
    with open(os.path.join(out_dir, "manifest.json"), "w",
              encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return results_path


# --- benchmarking -----------------------------------------------------------

def throughput_bench(pack, docs, repetitions, build_seconds=0.0):
    """Items/second as a function of test count, amortizing the pack build.

    Wall-clock based and machine-dependent; never used as an acceptance
    gate. ``build_seconds`` is the one-time pack construction cost measured
    by the caller (0 when benchmarking a preloaded pack).
    """
    docs = list(docs)
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if not docs:
        raise ValueError("docs must be non-empty")

    per_item = np.zeros(len(docs))
    for _ in range(repetitions):
        for i, doc in enumerate(docs):
            t0 = time.perf_counter()
            detector.score_text(pack, doc)
            per_item[i] += time.perf_counter() - t0
    per_item /= repetitions

    cumulative = np.cumsum(per_item)
    checkpoints = sorted({1, 2, 5} | {len(docs)} |
                         {min(len(docs), v) for v in
                          (10, 20, 50, 100, 200, 500, 1000)})
    curve = [{"n_docs": m,
              "items_per_second": m / (build_seconds + cumulative[m - 1])}
             for m in checkpoints if m <= len(docs)]
    return {
        "n_docs": len(docs),
        "repetitions": repetitions,
        "build_seconds": build_seconds,
        "mean_item_seconds": float(per_item.mean()),
        "curve": curve,
        "note": "wall-clock throughput; machine-dependent",
    }


def bench_kernels(size=200_000, k=7, steps=2000, trials=200, seed=0):
    """Time the hot kernels on every available backend.

    Returns {backend: {kernel: seconds}}; used by ``surpmark bench
    --kernels`` to compare the compiled extension with the numpy fallback.
    """
    report = {}
    values = np.sort(make_rng(seed, 1).standard_normal(size))
    weights = np.ones(size)
    cum = np.cumsum(make_rng(seed, 2).dirichlet(np.ones(k), size=k), axis=1)
    cum[:, -1] = 1.0
    states = make_rng(seed, 3).integers(0, k, size=size)
    uniforms = make_rng(seed, 4).random(steps)
    inits = np.zeros(trials, dtype=np.int64)
    for name, impl in backend.available_backends().items():
        timings = {}
        t0 = time.perf_counter()
        impl.kmeans_splits(values, weights, k)
        timings["kmeans_splits"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        impl.count_pairs(states, k)
        timings["count_pairs"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        impl.walk_chain(cum, 0, uniforms)
        timings["walk_chain"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        impl.simulate_transition_counts(cum, inits, steps, make_rng(seed, 5))
        timings["simulate_transition_counts"] = time.perf_counter() - t0
        report[name] = timings
    return report

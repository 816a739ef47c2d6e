"""Offline reference-pack construction and online scoring.

The pack is the frozen offline artifact: a shared quantizer fitted on the
pooled reference surprisals plus raw per-corpus transition counts. Storing
counts (not normalized matrices) keeps alpha and the conditionals exact for
every test length and makes later reference merges lossless.

Sign convention (easy to invert silently, so stated once and prominently):
``delta_gjs = gap to the machine reference minus gap to the human
reference``; a score <= tau classifies as machine, > tau as human.
"""

import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .divergence import delta_gjs_parts
from .errors import (CorruptPack, EmptyCorpus, JsonlError, NonFiniteValue,
                     PackIoError, RecordTooShort, SurpMarkError,
                     VersionMismatch)
from .markov import TransitionCounts, count_transitions, merge_counts
from .quantizer import Quantizer, default_bins, fit_quantizer, quantize

log = logging.getLogger(__name__)

PACK_FORMAT_VERSION = 1
LABELS = ("human", "machine")


@dataclass(frozen=True)
class SurprisalRecord:
    """One document's surprisal sequence.

    ``surprisals`` holds one value per token after the first (a document of
    T tokens carries T-1 surprisals and contributes T-2 transitions). Values
    must be finite; real surprisals are nonnegative, but synthetic
    pseudo-surprisals are accepted as-is.
    """

    id: str
    surprisals: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        v = np.asarray(self.surprisals, dtype=np.float64).ravel()
        bad = np.flatnonzero(~np.isfinite(v))
        if bad.size:
            raise NonFiniteValue(int(bad[0]))
        if self.label is not None and self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS} or None")
        object.__setattr__(self, "surprisals", v)

    @property
    def num_transitions(self):
        return max(len(self.surprisals) - 1, 0)


@dataclass(frozen=True)
class ReferencePack:
    """Frozen detector state: shared quantizer + both reference counts."""

    quantizer: Quantizer
    counts_machine: TransitionCounts
    counts_human: TransitionCounts
    metadata: dict = field(default_factory=dict)
    format_version: int = PACK_FORMAT_VERSION

    def __post_init__(self):
        if not (self.quantizer.k == self.counts_machine.k == self.counts_human.k):
            raise CorruptPack("k", "quantizer and counts disagree")
        if self.counts_machine.num_transitions < 1:
            raise CorruptPack("counts_machine", "no transitions")
        if self.counts_human.num_transitions < 1:
            raise CorruptPack("counts_human", "no transitions")

    @property
    def k(self):
        return self.quantizer.k

    @property
    def n_machine(self):
        return self.counts_machine.num_transitions

    @property
    def n_human(self):
        return self.counts_human.num_transitions


@dataclass(frozen=True)
class ScoreReport:
    """Scoring result for one document.

    ``gjs_to_machine``/``gjs_to_human`` are on the likelihood-ratio scale
    (alpha * KL_ref + KL_test to the mixture), so ``delta_gjs`` is exactly
    their difference. ``verdict`` is set only when a threshold was supplied.
    """

    id: str
    delta_gjs: float
    gjs_to_machine: float
    gjs_to_human: float
    alpha_machine: float
    alpha_human: float
    test_transitions: int
    verdict: Optional[str] = None

    def to_dict(self):
        return {
            "id": self.id,
            "delta_gjs": self.delta_gjs,
            "gjs_to_machine": self.gjs_to_machine,
            "gjs_to_human": self.gjs_to_human,
            "alpha_machine": self.alpha_machine,
            "alpha_human": self.alpha_human,
            "test_transitions": self.test_transitions,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class ScoreFailure:
    """Per-item error slot for batch scoring."""

    id: str
    error: str

    def to_dict(self):
        return {"id": self.id, "error": self.error}


def _corpus_counts(docs, q, side, on_short):
    short = [d.id for d in docs if len(d.surprisals) < 2]
    if short:
        if on_short == "error":
            raise RecordTooShort(short)
        log.warning("%s side: skipping %d record(s) shorter than 2 surprisals: %s",
                    side, len(short), short[:10])
    total = TransitionCounts(q.k, np.zeros((q.k, q.k), dtype=np.int64))
    for doc in docs:
        if len(doc.surprisals) < 2:
            continue
        states = quantize(q, doc.surprisals)
        total = merge_counts(total, count_transitions(states, q.k))
    return total


def build_references(human_docs, machine_docs, k=None, *, on_short="error",
                     metadata=None, bin_scale=0.75):
    """Build a reference pack from labeled surprisal corpora.

    Fits the shared quantizer on the pooled surprisals of both corpora,
    discretizes each document and accumulates per-corpus transition counts
    with no cross-document transitions. When ``k`` is omitted it defaults to
    ``default_bins`` of the total reference transition count.

    ``on_short`` controls records with fewer than 2 surprisals: ``"error"``
    (default) rejects the build listing the offending ids, ``"skip"``
    downgrades to a warning.
    """
    if not human_docs:
        raise EmptyCorpus("human")
    if not machine_docs:
        raise EmptyCorpus("machine")
    if on_short not in ("error", "skip"):
        raise ValueError("on_short must be 'error' or 'skip'")

    usable = [d for d in list(human_docs) + list(machine_docs)
              if len(d.surprisals) >= 2]
    if not usable:
        raise RecordTooShort([d.id for d in list(human_docs) + list(machine_docs)])
    pooled = np.concatenate([d.surprisals for d in usable])
    total_transitions = sum(d.num_transitions for d in usable)
    if k is None:
        k = default_bins(total_transitions, scale=bin_scale)
    q = fit_quantizer(pooled, k)

    counts_human = _corpus_counts(list(human_docs), q, "human", on_short)
    counts_machine = _corpus_counts(list(machine_docs), q, "machine", on_short)
    return ReferencePack(quantizer=q, counts_machine=counts_machine,
                         counts_human=counts_human,
                         metadata=dict(metadata or {}))


def score_text(pack, doc, tau=None, *, mode="joint", alpha_mode="per-side"):
    """Score one document against the pack (Eq.-style decision statistic)."""
    if len(doc.surprisals) < 2:
        raise RecordTooShort([doc.id])
    states = quantize(pack.quantizer, doc.surprisals)
    test = count_transitions(states, pack.k)
    parts = delta_gjs_parts(pack.counts_machine, pack.counts_human, test,
                            mode=mode, alpha_mode=alpha_mode)
    verdict = None
    if tau is not None:
        verdict = "machine" if parts.score <= tau else "human"
    return ScoreReport(id=doc.id,
                       delta_gjs=parts.score,
                       gjs_to_machine=parts.to_first.scaled,
                       gjs_to_human=parts.to_second.scaled,
                       alpha_machine=parts.alpha_first,
                       alpha_human=parts.alpha_second,
                       test_transitions=test.num_transitions,
                       verdict=verdict)


def _threads_from_env():
    raw = os.environ.get("SURPMARK_THREADS", "")
    try:
        return max(int(raw), 1)
    except ValueError:
        return 1


def score_batch(pack, docs, tau=None, *, mode="joint", alpha_mode="per-side",
                threads=None):
    """Score many documents, order-preserving.

    Per-document failures become :class:`ScoreFailure` slots instead of
    aborting the batch. Scoring is stateless per document, so the result is
    independent of the degree of parallelism (``threads`` or the
    SURPMARK_THREADS environment variable).
    """
    docs = list(docs)
    if threads is None:
        threads = _threads_from_env()

    def one(doc):
        try:
            return score_text(pack, doc, tau, mode=mode, alpha_mode=alpha_mode)
        except SurpMarkError as exc:
            return ScoreFailure(id=doc.id, error=str(exc))

    if threads > 1 and len(docs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, docs))
    return [one(d) for d in docs]


def calibrate_tau(scores_human, scores_machine):
    """Threshold maximizing balanced accuracy on a labeled calibration set.

    Scans midpoints between adjacent distinct scores; among maximizers the
    smallest candidate is returned (deterministic).
    """
    h = np.asarray(scores_human, dtype=np.float64)
    m = np.asarray(scores_machine, dtype=np.float64)
    if h.size == 0 or m.size == 0:
        raise EmptyCorpus("human" if h.size == 0 else "machine")
    pooled = np.unique(np.concatenate([h, m]))
    candidates = np.concatenate([[pooled[0] - 1.0],
                                 (pooled[:-1] + pooled[1:]) / 2.0,
                                 [pooled[-1] + 1.0]])
    best_tau, best_acc = candidates[0], -1.0
    for tau in candidates:
        acc = 0.5 * ((m <= tau).mean() + (h > tau).mean())
        if acc > best_acc + 1e-15:
            best_acc, best_tau = acc, tau
    return float(best_tau)


# --- pack serialization -----------------------------------------------------
#
# Single JSON document, UTF-8, sorted keys, floats as shortest round-trip
# decimals. The byte layout is deterministic: rebuilding a pack from
# identical inputs serializes to identical bytes.

def pack_to_json(pack):
    doc = {
        "format_version": pack.format_version,
        "quantizer": pack.quantizer.to_dict(),
        "counts_machine": {"k": pack.counts_machine.k,
                           "counts": pack.counts_machine.counts.tolist()},
        "counts_human": {"k": pack.counts_human.k,
                         "counts": pack.counts_human.counts.tolist()},
        "n_machine": pack.n_machine,
        "n_human": pack.n_human,
        "metadata": pack.metadata,
    }
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _counts_from_dict(d, name):
    if not isinstance(d, dict) or "k" not in d or "counts" not in d:
        raise CorruptPack(name, "expected an object with 'k' and 'counts'")
    try:
        k = int(d["k"])
        arr = np.asarray(d["counts"], dtype=np.int64)
        return TransitionCounts(k, arr)
    except (TypeError, ValueError, SurpMarkError) as exc:
        raise CorruptPack(name, str(exc)) from exc


def pack_from_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptPack("json", str(exc)) from exc
    if not isinstance(doc, dict):
        raise CorruptPack("json", "top level is not an object")
    if "format_version" not in doc:
        raise CorruptPack("format_version", "missing")
    version = doc["format_version"]
    if version != PACK_FORMAT_VERSION:
        raise VersionMismatch(version, PACK_FORMAT_VERSION)
    try:
        q = Quantizer.from_dict(doc["quantizer"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptPack("quantizer", str(exc)) from exc
    counts_machine = _counts_from_dict(doc.get("counts_machine"), "counts_machine")
    counts_human = _counts_from_dict(doc.get("counts_human"), "counts_human")
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise CorruptPack("metadata", "not an object")
    for name, counts, stored in (("n_machine", counts_machine, doc.get("n_machine")),
                                 ("n_human", counts_human, doc.get("n_human"))):
        if stored != counts.num_transitions:
            raise CorruptPack(name, f"stored {stored} != counted "
                                    f"{counts.num_transitions}")
    try:
        return ReferencePack(quantizer=q, counts_machine=counts_machine,
                             counts_human=counts_human, metadata=metadata,
                             format_version=int(version))
    except SurpMarkError:
        raise
    except (TypeError, ValueError) as exc:
        raise CorruptPack("pack", str(exc)) from exc


def save_pack(pack, destination):
    try:
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(pack_to_json(pack))
    except OSError as exc:
        raise PackIoError(f"cannot write {destination}: {exc}") from exc


def load_pack(source):
    try:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise PackIoError(f"cannot read {source}: {exc}") from exc
    return pack_from_json(text)


# --- surprisal JSONL --------------------------------------------------------
#
# One record per line: {"id": "...", "label": "human"|"machine"|null,
# "surprisals": [...]}; unknown fields are ignored; a malformed line aborts
# with its line number.

def record_from_obj(obj, line_no):
    if not isinstance(obj, dict):
        raise JsonlError(line_no, "record is not an object")
    if "id" not in obj or "surprisals" not in obj:
        raise JsonlError(line_no, "missing 'id' or 'surprisals'")
    label = obj.get("label")
    if label is not None and label not in LABELS:
        raise JsonlError(line_no, f"label must be one of {LABELS} or null")
    surprisals = obj["surprisals"]
    if not isinstance(surprisals, list) or not all(
            isinstance(v, (int, float)) and math.isfinite(v) for v in surprisals):
        raise JsonlError(line_no, "'surprisals' must be a list of finite numbers")
    return SurprisalRecord(id=str(obj["id"]),
                           surprisals=np.asarray(surprisals, dtype=np.float64),
                           label=label)


def read_records(path):
    records = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise JsonlError(line_no, f"invalid JSON: {exc}") from exc
                records.append(record_from_obj(obj, line_no))
    except OSError as exc:
        raise PackIoError(f"cannot read {path}: {exc}") from exc
    return records


def record_to_obj(record):
    return {"id": record.id, "label": record.label,
            "surprisals": [float(v) for v in record.surprisals]}


def write_records(path, records):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record_to_obj(record), ensure_ascii=False) + "\n")
    except OSError as exc:
        raise PackIoError(f"cannot write {path}: {exc}") from exc

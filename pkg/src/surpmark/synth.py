"""Deterministic synthetic data sources.

Three generators drive the validation suite without any neural dependency:
discrete Markov chain samplers, continuous pseudo-surprisal sources (a
hidden chain with per-state Gaussian emissions), and a toy n-gram language
model that turns token corpora into real surprisal sequences through the
same path a neural proxy would.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import backend
from ._rng import STREAM_CHAIN, STREAM_EMISSION, make_rng
from .detector import SurprisalRecord
from .errors import EmptyCorpus, InvalidSpec, SequenceTooShort
from .markov import is_irreducible, stationary_distribution

# conventional stupid-backoff damping; cancels under per-context
# normalization, recorded for reference (see NgramLM)
BACKOFF_FACTOR = 0.4


def row_cumsum(matrix):
    """Inclusive row cumsum with the last column clamped to exactly 1."""
    cum = np.cumsum(np.asarray(matrix, dtype=np.float64), axis=1)
    cum[:, -1] = 1.0
    return cum


@dataclass(frozen=True)
class ChainSpec:
    """A finite Markov chain: row-stochastic matrix plus initial law.

    ``init`` is a length-k simplex vector or the string "stationary", in
    which case the chain must be irreducible.
    """

    matrix: np.ndarray
    init: Union[np.ndarray, str] = "stationary"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidSpec(f"matrix shape {m.shape} is not square")
        if (m < 0).any() or np.abs(m.sum(axis=1) - 1.0).max() > 1e-9:
            raise InvalidSpec("matrix rows must be nonnegative and sum to 1")
        object.__setattr__(self, "matrix", m)
        if isinstance(self.init, str):
            if self.init != "stationary":
                raise InvalidSpec(f"unknown init {self.init!r}")
            if not is_irreducible(m):
                raise InvalidSpec("init='stationary' needs an irreducible chain")
        else:
            p = np.asarray(self.init, dtype=np.float64)
            if p.shape != (m.shape[0],) or (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
                raise InvalidSpec("init must be a length-k simplex vector")
            object.__setattr__(self, "init", p)

    @property
    def k(self):
        return self.matrix.shape[0]

    def init_distribution(self):
        if isinstance(self.init, str):
            return stationary_distribution(self.matrix)
        return self.init

    def to_dict(self):
        init = self.init if isinstance(self.init, str) else [float(v) for v in self.init]
        return {"matrix": self.matrix.tolist(), "init": init}

    @classmethod
    def from_dict(cls, d):
        init = d.get("init", "stationary")
        if not isinstance(init, str):
            init = np.asarray(init, dtype=np.float64)
        return cls(matrix=np.asarray(d["matrix"], dtype=np.float64), init=init)


@dataclass(frozen=True)
class EmissionSpec:
    """Hidden chain plus per-state Gaussian emissions (pseudo-surprisals)."""

    chain: ChainSpec
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        stds = np.asarray(self.stds, dtype=np.float64)
        k = self.chain.k
        if means.shape != (k,) or stds.shape != (k,):
            raise InvalidSpec("means/stds must have one entry per state")
        if (stds <= 0).any():
            raise InvalidSpec("stds must be positive")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    def to_dict(self):
        return {"chain": self.chain.to_dict(),
                "means": self.means.tolist(), "stds": self.stds.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(chain=ChainSpec.from_dict(d["chain"]),
                   means=np.asarray(d["means"], dtype=np.float64),
                   stds=np.asarray(d["stds"], dtype=np.float64))


def _resolve_rng(seed, *stream):
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(seed, *stream)


def sample_chain(spec, length, seed):
    """Sample a state sequence (1-based states) of the given length.

    The initial state consumes one uniform draw, then one per transition;
    fixed (seed, spec, length) gives a fixed sequence.
    """
    length = int(length)
    if length < 1:
        raise InvalidSpec("length must be >= 1")
    rng = _resolve_rng(seed, STREAM_CHAIN)
    init = spec.init_distribution()
    cum_init = np.cumsum(init)
    cum_init[-1] = 1.0
    start = int(np.searchsorted(cum_init, rng.random(), side="right"))
    start = min(start, spec.k - 1)
    if length == 1:
        return np.array([start + 1], dtype=np.int64)
    uniforms = rng.random(length - 1)
    states = backend.walk_chain(row_cumsum(spec.matrix), start, uniforms)
    return states + 1


def sample_surprisals(spec, length, seed):
    """Sample a continuous pseudo-surprisal sequence from an EmissionSpec.

    With an integer seed the hidden path is exactly
    ``sample_chain(spec.chain, length, seed)`` (chain and emission noise use
    separate derived streams); a Generator draws both sequentially.
    """
    if isinstance(seed, np.random.Generator):
        chain_rng = emission_rng = seed
    else:
        chain_rng = make_rng(seed, STREAM_CHAIN)
        emission_rng = make_rng(seed, STREAM_EMISSION)
    states = sample_chain(spec.chain, length, chain_rng)
    idx = states - 1
    return spec.means[idx] + spec.stds[idx] * emission_rng.standard_normal(len(states))


@dataclass(frozen=True)
class NgramLM:
    """Add-delta smoothed n-gram model with fallback to shorter contexts.

    Every stored context distributes add-delta mass over the whole
    vocabulary, so each conditional sums to 1 and is positive everywhere.
    An entirely unseen context falls back to its shortened suffix; the
    conventional stupid-backoff damping factor (0.4) cancels once the
    fallback distribution is normalized, so it never appears numerically.
    """

    order: int
    delta: float
    vocab: tuple
    trained_tokens: int
    _context_counts: dict = field(repr=False)
    _index: dict = field(repr=False)

    def _context_table(self, context):
        context = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        while context not in self._context_counts and context:
            context = context[1:]
        return self._context_counts[context]

    def probability(self, context, token):
        """P(token | context), backed off to the longest known suffix."""
        counts, total = self._context_table(context)
        v = len(self.vocab)
        c = counts.get(token, 0)
        if token not in self._index:
            raise KeyError(f"token {token!r} not in vocabulary")
        return (c + self.delta) / (total + self.delta * v)

    def distribution(self, context):
        """Full conditional over the vocabulary, in vocab order."""
        counts, total = self._context_table(context)
        v = len(self.vocab)
        out = np.full(v, self.delta)
        for token, c in counts.items():
            out[self._index[token]] += c
        return out / (total + self.delta * v)


def fit_ngram_lm(corpus, order, delta):
    """Fit an add-delta n-gram model on a corpus of token sequences."""
    corpus = [list(doc) for doc in corpus]
    if not corpus or all(len(doc) == 0 for doc in corpus):
        raise EmptyCorpus("training")
    order = int(order)
    if order < 1:
        raise InvalidSpec("order must be >= 1")
    if not delta > 0:
        raise InvalidSpec("delta must be positive")

    vocab = sorted({tok for doc in corpus for tok in doc})
    context_counts = {(): [Counter(), 0]}
    trained = 0
    for doc in corpus:
        trained += len(doc)
        for t, token in enumerate(doc):
            for h in range(0, order):
                if h > t:
                    break
                context = tuple(doc[t - h:t])
                table = context_counts.setdefault(context, [Counter(), 0])
                table[0][token] += 1
                table[1] += 1
    frozen = {ctx: (dict(counter), total)
              for ctx, (counter, total) in context_counts.items()}
    return NgramLM(order=order, delta=float(delta), vocab=tuple(vocab),
                   trained_tokens=trained,
                   _context_counts=frozen,
                   _index={tok: i for i, tok in enumerate(vocab)})


def ngram_surprisals(lm, tokens, id="", label=None):
    """Surprisal sequence of a token sequence under the model, in nats.

    The first token carries no surprisal: a sequence of T tokens yields
    T-1 values, all finite thanks to smoothing.
    """
    tokens = list(tokens)
    if len(tokens) < 2:
        raise SequenceTooShort("need at least 2 tokens")
    values = np.empty(len(tokens) - 1)
    for t in range(1, len(tokens)):
        p = lm.probability(tokens[:t], tokens[t])
        values[t - 1] = -np.log(p)
    return SurprisalRecord(id=id, surprisals=values, label=label)

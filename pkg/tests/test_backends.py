"""Bit-equality of the compiled and pure-Python kernel backends."""

import numpy as np
import pytest

from surpmark._rng import make_rng
from surpmark.backend import available_backends

BACKENDS = available_backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2,
                                reason="compiled extension not built")


def cum_matrix(rng, k):
    m = rng.dirichlet(np.ones(k), size=k)
    cum = np.cumsum(m, axis=1)
    cum[:, -1] = 1.0
    return cum


@needs_both
class TestParity:
    def test_kmeans_splits(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            m = int(rng.integers(5, 400))
            k = int(rng.integers(1, min(m, 12) + 1))
            values = np.sort(rng.choice(rng.normal(0, 3, m), m, replace=False))
            weights = rng.integers(1, 5, m).astype(float)
            results = [impl.kmeans_splits(values, weights, k)
                       for impl in BACKENDS.values()]
            (s1, e1), (s2, e2) = results
            np.testing.assert_array_equal(s1, s2)
            assert e1 == e2  # identical operation order -> identical floats

    def test_count_pairs(self):
        rng = np.random.default_rng(1)
        states = rng.integers(0, 6, size=5000)
        outs = [impl.count_pairs(states, 6) for impl in BACKENDS.values()]
        np.testing.assert_array_equal(outs[0], outs[1])

    def test_walk_chain(self):
        rng = np.random.default_rng(2)
        cum = cum_matrix(rng, 5)
        uniforms = rng.random(10000)
        outs = [impl.walk_chain(cum, 3, uniforms)
                for impl in BACKENDS.values()]
        np.testing.assert_array_equal(outs[0], outs[1])

    def test_simulate_transition_counts_same_stream(self):
        rng = np.random.default_rng(3)
        cum = cum_matrix(rng, 4)
        inits = rng.integers(0, 4, size=64)
        outs = [impl.simulate_transition_counts(cum, inits, 500,
                                                make_rng(9, 1, 2))
                for impl in BACKENDS.values()]
        np.testing.assert_array_equal(outs[0], outs[1])

    def test_walk_handles_zero_probability_states(self):
        # a state with zero mass is skipped identically by both backends
        cum = np.array([[0.5, 0.5, 1.0], [0.2, 0.2, 1.0], [1.0, 1.0, 1.0]])
        uniforms = np.linspace(0.0, 0.999, 1000)
        outs = [impl.walk_chain(cum, 0, uniforms)
                for impl in BACKENDS.values()]
        np.testing.assert_array_equal(outs[0], outs[1])
        assert set(outs[0].tolist()) <= {0, 1, 2}

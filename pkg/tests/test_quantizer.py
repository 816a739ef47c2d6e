"""Quantizer: exact 1-D k-means fit, state mapping, default bin rule."""

import numpy as np
import pytest

from surpmark import backend, default_bins, fit_quantizer, quantize
from surpmark.errors import EmptyInput, NonFiniteValue, TooFewDistinctValues

from tests import oracles


class TestFit:
    def test_symmetric_two_cluster(self):
        q = fit_quantizer([0, 0, 0, 10, 10, 10], 2)
        assert q.centroids == (0.0, 10.0)
        assert q.boundaries == (5.0,)
        assert q.fitted_on == 6

    def test_k_one_is_mean(self):
        q = fit_quantizer([3, 1, 2], 1)
        assert q.centroids == (2.0,)
        assert q.boundaries == ()

    def test_two_component_mixture_matches_split_oracle(self):
        rng = np.random.default_rng(7)
        values = np.concatenate([rng.normal(2, 0.5, 100), rng.normal(8, 0.5, 100)])
        q = fit_quantizer(values, 2)
        # exhaustive scan over every split point of the sorted data
        sv = np.sort(values)
        best_sse, best_split = np.inf, None
        for i in range(1, len(sv)):
            sse = sv[:i].var() * i + sv[i:].var() * (len(sv) - i)
            if sse < best_sse:
                best_sse, best_split = sse, i
        np.testing.assert_allclose(
            q.centroids, [sv[:best_split].mean(), sv[best_split:].mean()],
            rtol=0, atol=1e-12)

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_optimality_vs_brute_force(self, k):
        rng = np.random.default_rng(100 + k)
        for _ in range(10):
            n = int(rng.integers(k, 30))
            values = np.round(rng.normal(0, 3, n), 3)
            if len(np.unique(values)) < k:
                continue
            uniq, counts = np.unique(values, return_counts=True)
            _, sse = backend.kmeans_splits(uniq, counts.astype(float), k)
            want = oracles.brute_force_kmeans_sse(values.tolist(), k)
            assert sse == pytest.approx(want, abs=1e-9)

    def test_monotone_refinement(self):
        rng = np.random.default_rng(5)
        values = rng.normal(0, 1, 200)
        uniq, counts = np.unique(values, return_counts=True)
        sses = [backend.kmeans_splits(uniq, counts.astype(float), k)[1]
                for k in range(1, 8)]
        assert all(b <= a + 1e-12 for a, b in zip(sses, sses[1:]))

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        values = rng.normal(0, 1, 500)
        assert fit_quantizer(values, 5) == fit_quantizer(values.copy(), 5)

    def test_invariants_and_coverage(self):
        rng = np.random.default_rng(11)
        for k in (2, 5, 9):
            values = rng.normal(0, 2, 400)
            q = fit_quantizer(values, k)
            c = np.array(q.centroids)
            b = np.array(q.boundaries)
            assert (np.diff(c) > 0).all()
            np.testing.assert_allclose(b, (c[:-1] + c[1:]) / 2, atol=0)
            assert (b > c[:-1]).all() and (b < c[1:]).all()
            # every state occupied on the training values
            states = quantize(q, values)
            assert set(states.tolist()) == set(range(1, k + 1))

    def test_errors(self):
        with pytest.raises(EmptyInput):
            fit_quantizer([], 2)
        with pytest.raises(TooFewDistinctValues) as exc:
            fit_quantizer([1.0, 1.0, 1.0], 2)
        assert exc.value.k == 2 and exc.value.distinct == 1
        with pytest.raises(NonFiniteValue) as exc:
            fit_quantizer([0.0, np.nan, 1.0], 2)
        assert exc.value.index == 1


class TestQuantize:
    def test_boundary_tie_goes_up(self):
        q = fit_quantizer([0, 0, 0, 10, 10, 10], 2)
        assert quantize(q, [1, 9, 5]).tolist() == [1, 2, 2]

    def test_empty_passthrough(self):
        q = fit_quantizer([0, 1, 2], 3)
        assert quantize(q, []).tolist() == []

    def test_matches_nearest_centroid_scan(self):
        rng = np.random.default_rng(13)
        q = fit_quantizer(rng.normal(0, 2, 300), 6)
        values = rng.normal(0, 4, 500)  # includes out-of-range values
        want = oracles.nearest_centroid_states(q.centroids, values)
        assert quantize(q, values).tolist() == want

    def test_out_of_range_clamps(self):
        q = fit_quantizer([0.0, 1.0, 2.0], 3)
        assert quantize(q, [-100.0, 100.0]).tolist() == [1, 3]

    def test_non_finite_rejected(self):
        q = fit_quantizer([0.0, 1.0], 2)
        with pytest.raises(NonFiniteValue):
            quantize(q, [0.0, np.inf])

    def test_length_preserved(self):
        rng = np.random.default_rng(17)
        q = fit_quantizer(rng.normal(size=50), 4)
        values = rng.normal(size=321)
        assert len(quantize(q, values)) == 321


class TestDefaultBins:
    def test_reference_size_band(self):
        assert default_bins(60000) == 7

    def test_clamp_floor(self):
        assert default_bins(1) == 2

    def test_unit_scale(self):
        assert default_bins(60000, scale=1.0) == 9

    def test_clamp_ceiling(self):
        assert default_bins(10 ** 12) == 12

    def test_invalid(self):
        with pytest.raises(ValueError):
            default_bins(0)

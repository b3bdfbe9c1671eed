import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from synsq.errors import InputError
from synsq.metrics import emd_1d, emd_lp_oracle, emd_score, ideal_distribution
from synsq.signals import chirp_if
from synsq.synchrosqueeze import TFDistribution, VGrid

B = np.arange(1024) / 1024


def histograms(max_len=32):
    return st.integers(2, max_len).flatmap(
        lambda n: st.tuples(arrays(np.float64, n, elements=st.floats(0, 1)),
                            arrays(np.float64, n, elements=st.floats(0, 1))))


def normalised(p):
    return p / p.sum()


class TestIdeal:
    def test_constant_single_row(self):
        vg = VGrid.uniform(0, 512, 1.0)
        ideal = ideal_distribution(lambda b: np.full(b.shape, 300.0), vg, B)
        D = ideal.D
        assert np.all(D[300] == 1) and D.sum() == 1024
        assert ideal.out_of_band == 0

    def test_chirp_minimum_at_quarter(self):
        vg = VGrid.uniform(0, 60, 1.0)
        ideal = ideal_distribution(chirp_if, vg, B)
        lowest = np.nonzero(ideal.hot == ideal.hot.min())[0]
        assert B[lowest].mean() == pytest.approx(0.25, abs=1 / 1024)
        assert ideal.hot[256] == round(30 * (1 - 0.1 * np.pi))
        assert np.allclose(ideal.D.sum(0), 1)

    def test_out_of_band_flagged(self):
        vg = VGrid.uniform(25, 60, 1.0)
        ideal = ideal_distribution(chirp_if, vg, B)
        assert ideal.out_of_band > 0
        assert np.all(ideal.D[:, ideal.hot < 0] == 0)

    def test_oracle_shape_checked(self):
        with pytest.raises(InputError):
            ideal_distribution(np.ones(3), VGrid.uniform(0, 60), B)


class TestScore:
    vg = VGrid.uniform(0, 60, 1.0)

    def tf(self, T):
        return TFDistribution(T, self.vg, (B,))

    def test_identical_is_zero(self):
        ideal = ideal_distribution(chirp_if, self.vg, B)
        res = emd_score(self.tf(ideal.D), ideal)
        assert res.value == 0.0 and res.used == 1024 and res.excluded == 0

    @pytest.mark.parametrize("k", [1, 3, 10])
    def test_displaced_spike(self, k):
        ideal = ideal_distribution(chirp_if, self.vg, B)
        T = np.roll(ideal.D, k, axis=0)
        assert emd_score(self.tf(T), ideal).value == pytest.approx(k)
        p = np.zeros(12)
        p[0] = 1
        q = np.roll(p, k)
        assert emd_lp_oracle(p, q) == pytest.approx(k)

    @pytest.mark.parametrize("w", [1, 2, 5])
    def test_uniform_around_ridge(self, w):
        ideal = ideal_distribution(lambda b: np.full(b.shape, 30.0), self.vg, B)
        T = np.zeros_like(ideal.D)
        T[30 - w:30 + w + 1] = 1.0
        # mean distance of 2w+1 equally weighted bins from the centre
        expected = w * (w + 1) / (2 * w + 1)
        assert emd_score(self.tf(T), ideal).value == pytest.approx(expected, rel=1e-12)

    def test_empty_slices_excluded(self):
        ideal = ideal_distribution(chirp_if, self.vg, B)
        T = ideal.D.copy()
        T[:, :100] = 0
        res = emd_score(self.tf(T), ideal)
        assert res.used == 924 and res.excluded == 100
        assert np.all(np.isnan(res.per_slice[:100]))

    def test_scale_invariant(self):
        rng = np.random.default_rng(0)
        T = rng.random((61, 1024))
        ideal = ideal_distribution(chirp_if, self.vg, B)
        a = emd_score(self.tf(T), ideal).value
        assert emd_score(self.tf(7.5 * T), ideal).value == pytest.approx(a, rel=1e-12)
        assert a >= 0

    def test_errors(self):
        ideal = ideal_distribution(chirp_if, self.vg, B)
        other = TFDistribution(np.ones((41, 1024)), VGrid.uniform(0, 40), (B,))
        with pytest.raises(InputError, match="different grids"):
            emd_score(other, ideal)
        with pytest.raises(InputError):
            emd_score(self.tf(np.zeros((61, 1024))), ideal)
        with pytest.raises(InputError):
            emd_score(self.tf(-ideal.D), ideal)


class TestOneDimensional:
    def test_trivial(self):
        assert emd_1d([0.2, 0.8], [0.2, 0.8]) == 0
        assert emd_1d([1, 0], [0, 1]) == 1
        assert emd_lp_oracle([1, 0], [0, 1]) == 1
        assert emd_1d([1, 0, 0], [0, 0, 1], dv=2.5) == 5.0

    def test_oracle_input_checks(self):
        with pytest.raises(InputError):
            emd_lp_oracle([0.5, 0.5], [1.0])
        with pytest.raises(InputError):
            emd_lp_oracle([0.5, 0.4], [0.5, 0.5])
        with pytest.raises(InputError):
            emd_lp_oracle(np.full(33, 1 / 33), np.full(33, 1 / 33))

    def test_hundred_random_pairs(self):
        rng = np.random.default_rng(2026)
        for _ in range(100):
            n = rng.integers(2, 33)
            p = normalised(rng.random(n))
            q = normalised(rng.random(n))
            assert abs(emd_lp_oracle(p, q) - emd_1d(p, q)) <= 1e-9

    @settings(max_examples=200, deadline=None)
    @given(histograms())
    def test_matches_oracle(self, pq):
        p, q = pq
        assume(p.sum() > 1e-6 and q.sum() > 1e-6)
        p, q = normalised(p), normalised(q)
        assert abs(emd_lp_oracle(p, q) - emd_1d(p, q)) <= 1e-9

    @settings(max_examples=100, deadline=None)
    @given(histograms(), st.integers(0, 2 ** 32 - 1))
    def test_metric_axioms(self, pq, seed):
        p, q = pq
        assume(p.sum() > 1e-6 and q.sum() > 1e-6)
        r = np.random.default_rng(seed).random(len(p)) + 1e-3
        d_pq, d_qp = emd_1d(p, q), emd_1d(q, p)
        assert d_pq >= 0
        assert d_pq == pytest.approx(d_qp, abs=1e-12)
        assert d_pq <= emd_1d(p, r) + emd_1d(r, q) + 1e-12
        assert emd_1d(p, p) == 0

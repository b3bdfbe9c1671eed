import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from synsq.errors import InputError, ParameterError
from synsq.signals import gen_single_chirp
from synsq.wavepacket import (FrameGrid, FrameSpec, Signal, analytic, build_frame_grid, covered,
                              forward_transform, make_mother_wavepacket, threshold_mask)


def plane(freq, fs):
    return Signal(np.exp(2j * np.pi * freq * np.arange(fs) / fs), float(fs))


class TestMother:
    def test_bump_vanishes_at_support_edge(self):
        w = make_mother_wavepacket("bump", None, 1.0)
        assert w.profile(1.0) == 0.0
        assert w.profile(0.999) > 0.0
        assert w.m is None and w.eps == 0.0

    def test_bump_essential_radius(self):
        w = make_mother_wavepacket("bump", None, 0.5)
        assert w.support_radius == 0.5
        assert w.profile(0.49) > 0
        assert w.profile(0.51) == 0

    def test_spline_decay_bound_at_two(self):
        w = make_mother_wavepacket("spline", 12, 1.0)
        assert w.eps > 0
        assert abs(w.profile(2.0)) <= w.eps / 3 ** 12
        # positive inside the unit ball
        r = np.linspace(0, 0.999, 1000)
        assert np.all(w.profile(r) > 0)

    @pytest.mark.parametrize("kind,m,d", [("bump", None, 0.0), ("bump", None, 1.5),
                                          ("spline", 0, 1.0), ("spline", 2.5, 1.0), ("wavelet", 3, 1.0)])
    def test_invalid_parameters(self, kind, m, d):
        with pytest.raises(ParameterError):
            make_mother_wavepacket(kind, m, d)

    @pytest.mark.parametrize("d", [1.0, 0.5])
    def test_unit_l2_norm(self, d):
        w = make_mother_wavepacket("bump", None, d)
        # independent trapezoid check on a fine grid
        r = np.linspace(-d, d, 400001)
        assert math.isclose(np.trapezoid(w.profile(r, 1) ** 2, r), 1.0, rel_tol=1e-8)
        rr = np.linspace(0, d, 400001)
        assert math.isclose(np.trapezoid(2 * np.pi * rr * w.profile(rr, 2) ** 2, rr), 1.0, rel_tol=1e-8)

    def test_spline_unit_norm(self):
        w = make_mother_wavepacket("spline", 12, 1.0)
        val = 2 * integrate.quad(lambda r: w.profile(r) ** 2, 0, 40, limit=400)[0]
        assert math.isclose(val, 1.0, rel_tol=1e-8)

    def test_spline_m_requirement_checked_at_pairing(self):
        w = make_mother_wavepacket("spline", 11, 1.0)
        with pytest.raises(ParameterError, match="m >="):
            FrameSpec(s=0.75, mother=w)
        FrameSpec(s=0.75, mother=make_mother_wavepacket("spline", 12, 1.0))


class TestFrameSpec:
    @pytest.mark.parametrize("s", [0.5, 1.0, 0.995, 0.3])
    def test_s_range(self, s):
        with pytest.raises(ParameterError):
            FrameSpec(s=s)

    def test_comparison_mode_admits_s_near_one(self):
        FrameSpec(s=0.999, comparison=True)

    def test_band_beyond_nyquist(self):
        with pytest.raises(ParameterError, match="Nyquist"):
            FrameSpec(band=(10, 600), length=1024, sample_rate=1024)

    def test_frame_index_range(self):
        with pytest.raises(ParameterError):
            FrameSpec(red=2, frame_index=2)


class TestFrameGrid:
    @pytest.mark.parametrize("s", [0.625, 0.75, 0.875])
    @pytest.mark.parametrize("red,j", [(1, 0), (4, 1), (4, 3), (10, 7)])
    def test_coverage_exhaustive_1d(self, s, red, j):
        spec = FrameSpec(s=s, red=red, frame_index=j, band=(150, 1600), length=8192, sample_rate=8192)
        grid = build_frame_grid(spec)
        freqs = np.arange(150, 1601, dtype=float)
        assert covered(grid, freqs).all()
        assert np.all(np.diff(grid.centers) > 0)

    def test_adjacent_overlap_half_radius(self):
        grid = build_frame_grid(FrameSpec(s=0.75, band=(150, 1600), length=8192, sample_rate=8192))
        a, r = grid.centers, grid.radii
        overlap = r[:-1] + r[1:] - np.diff(a)
        assert np.all(overlap >= 0.5 * np.minimum(r[:-1], r[1:]))

    def test_frames_are_offset(self):
        kw = dict(s=0.75, red=4, band=(150, 1600), length=8192, sample_rate=8192)
        c0 = build_frame_grid(FrameSpec(frame_index=0, **kw)).centers
        c2 = build_frame_grid(FrameSpec(frame_index=2, **kw)).centers
        assert np.intersect1d(np.round(c0, 9), np.round(c2, 9)).size == 0

    def test_union_of_frames_is_denser(self):
        kw = dict(s=0.75, red=4, length=1024, sample_rate=1024)
        union = np.concatenate([build_frame_grid(FrameSpec(frame_index=j, **kw)).centers for j in range(4)])
        assert union.size > 3.5 * build_frame_grid(FrameSpec(**kw)).n_centers

    def test_2d_ring_directions(self):
        spec = FrameSpec(n=2, s=0.625, band=(20, 120), length=256, sample_rate=256)
        grid = build_frame_grid(spec)
        mags = grid.magnitudes
        ring = np.argmin(np.abs(np.unique(np.round(mags, 9)) - 60))
        rho = np.unique(np.round(mags, 9))[ring]
        n_dir = np.count_nonzero(np.isclose(mags, rho))
        assert n_dir >= max(8, round(60 ** 0.375)) == 8
        assert np.all(np.diff(mags) >= -1e-9)
        assert grid.angular_width is not None and grid.angular_width.shape == (grid.n_centers,)

    @pytest.mark.parametrize("s", [0.625, 0.75, 0.875])
    @pytest.mark.parametrize("j", [0, 3])
    def test_coverage_exhaustive_2d(self, s, j):
        spec = FrameSpec(n=2, s=s, red=5, frame_index=j, band=(20, 120), length=256, sample_rate=256)
        grid = build_frame_grid(spec)
        k = np.arange(-120, 121)
        K1, K2 = np.meshgrid(k, k, indexing="ij")
        rad = np.hypot(K1, K2)
        pts = np.column_stack([K1[(rad >= 20) & (rad <= 120)], K2[(rad >= 20) & (rad <= 120)]])
        assert covered(grid, pts).all()


@pytest.fixture(scope="module")
def coeffs():
    spec = FrameSpec(s=0.75, band=(150, 1600), length=8192, sample_rate=8192)
    return forward_transform(plane(300.0, 8192), build_frame_grid(spec))


class TestForward:

    def test_flat_envelope_inside_support(self, coeffs):
        inside = np.abs(coeffs.grid.centers - 300) < coeffs.grid.radii
        assert inside.any()
        mag = np.abs(coeffs.W[inside])
        assert np.max(np.ptp(mag, axis=1) / mag.mean(axis=1)) <= 1e-8

    def test_zero_outside_support(self, coeffs):
        outside = np.abs(coeffs.grid.centers - 300) > coeffs.grid.radii
        assert outside.any()
        assert np.max(np.abs(coeffs.W[outside])) <= 1e-10

    def test_packets_have_unit_norm(self):
        L = 1024
        spec = FrameSpec(s=0.75, length=L, sample_rate=L)
        imp = np.zeros(L, dtype=complex)
        imp[0] = L  # discrete delta of unit mass
        c = forward_transform(Signal(imp, float(L)), build_frame_grid(spec))
        norms = np.sqrt(np.mean(np.abs(c.W) ** 2, axis=1))
        assert np.max(np.abs(norms - 1)) <= 1e-8

    def test_slice_parseval(self):
        L = 1024
        rng = np.random.default_rng(3)
        x = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        spec = FrameSpec(s=0.75, length=L, sample_rate=L)
        grid = build_frame_grid(spec)
        c = forward_transform(Signal(x, float(L)), grid)
        xi = np.fft.fftfreq(L, 1 / L)
        X = np.fft.fft(x) / L
        for i, a in enumerate(grid.centers):
            wnd = spec.mother.profile((xi - a) / a ** spec.s)
            wnd /= np.linalg.norm(wnd)
            windowed = np.sum(np.abs(X * wnd) ** 2)
            slice_energy = np.mean(np.abs(c.W[i]) ** 2)
            assert slice_energy <= windowed * (1 + 1e-10)

    def test_real_input_made_analytic(self):
        fs = 8192
        x = np.arange(fs) / fs
        f2 = np.where(x < 0.6, 0.8 * np.cos(300 * np.pi * x), 0.0)
        z = analytic(f2)
        Z = np.fft.fft(z)
        freqs = np.fft.fftfreq(fs, 1 / fs)
        assert np.max(np.abs(Z[(freqs < 0) & (freqs > -fs // 2)])) <= 1e-9 * np.max(np.abs(Z))
        assert freqs[np.argmax(np.abs(Z))] == 150
        assert np.allclose(z.real, f2, atol=1e-12)
        # a full-length cosine becomes a single +150 Hz line
        full = analytic(0.8 * np.cos(300 * np.pi * x))
        assert np.allclose(full, 0.8 * np.exp(2j * np.pi * 150 * x), atol=1e-12)

    def test_shift_equivariance(self):
        L = 1024
        rng = np.random.default_rng(0)
        x = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        grid = build_frame_grid(FrameSpec(s=0.75, red=3, frame_index=1, length=L, sample_rate=L))
        c = forward_transform(Signal(x, float(L)), grid)
        cs = forward_transform(Signal(np.roll(x, 37), float(L)), grid)
        assert np.max(np.abs(np.roll(c.W, 37, axis=1) - cs.W)) <= 1e-8
        assert np.max(np.abs(np.roll(c.G, 37, axis=2) - cs.G)) <= 1e-8

    @settings(max_examples=20, deadline=None)
    @given(alpha=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
           seed=st.integers(0, 2 ** 32 - 1))
    def test_linearity(self, alpha, seed):
        L = 256
        rng = np.random.default_rng(seed)
        f = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        g = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        grid = build_frame_grid(FrameSpec(s=0.75, length=L, sample_rate=L))
        lhs = forward_transform(Signal(alpha * f + g, float(L)), grid).W
        rhs = alpha * forward_transform(Signal(f, float(L)), grid).W + forward_transform(Signal(g, float(L)), grid).W
        scale = 1 + abs(alpha)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale * np.sqrt(L)

    def test_nan_rejected(self):
        L = 64
        x = np.ones(L, dtype=complex)
        x[3] = np.nan
        grid = build_frame_grid(FrameSpec(s=0.75, length=L, sample_rate=L))
        with pytest.raises(InputError):
            forward_transform(Signal(x, float(L)), grid)

    def test_empty_grid_rejected(self):
        spec = FrameSpec(s=0.75, length=64, sample_rate=64)
        with pytest.raises(InputError):
            forward_transform(plane(5, 64), FrameGrid(spec, np.array([]), np.array([])))

    def test_non_power_of_two_is_resampled(self):
        spec = FrameSpec(s=0.75, length=1024, sample_rate=1000)
        with pytest.warns(UserWarning, match="resampling"):
            c = forward_transform(plane(100.0, 1000), build_frame_grid(spec))
        assert c.W.shape[1] == 1024

    def test_2d_rows_match_full_grid(self):
        fs = 64
        rng = np.random.default_rng(1)
        x = rng.standard_normal((fs, fs)) + 1j * rng.standard_normal((fs, fs))
        grid = build_frame_grid(FrameSpec(n=2, s=0.75, band=(8, 30), length=fs, sample_rate=fs))
        full = forward_transform(Signal(x, float(fs)), grid)
        part = forward_transform(Signal(x, float(fs)), grid, rows=[0, 5, 63])
        assert np.allclose(full.W[:, :, [0, 5, 63]], part.W, atol=1e-12)
        assert np.allclose(full.G[:, :, :, [0, 5, 63]], part.G, atol=1e-9)
        # direct 2D inverse FFT for one centre
        a = grid.centers[7]
        k = np.fft.fftfreq(fs, 1 / fs)
        r = np.hypot(k[:, None] - a[0], k[None, :] - a[1]) / np.hypot(*a) ** 0.75
        wnd = grid.spec.mother.profile(r, 2)
        wnd /= np.linalg.norm(wnd)
        direct = np.fft.ifft2(np.fft.fft2(x) * wnd)
        assert np.allclose(full.W[7], direct, atol=1e-12)


class TestThreshold:
    def test_zero_coefficients_empty_mask(self):
        L = 256
        grid = build_frame_grid(FrameSpec(s=0.75, length=L, sample_rate=L))
        c = forward_transform(Signal(np.zeros(L, dtype=complex), float(L)), grid)
        assert not threshold_mask(c, 1e-2, "R").any()
        assert not threshold_mask(c, 1e-2, "S").any()

    def test_chirp_mask_near_30(self):
        c = forward_transform(gen_single_chirp(), build_frame_grid(FrameSpec(s=0.75)))
        m = threshold_mask(c, 1e-2, "R")
        hit = c.grid.centers[m.any(axis=1)]
        assert m.any()
        assert np.any(np.abs(hit - 30) < 10)

    def test_s_mask_inside_r_mask(self):
        rng = np.random.default_rng(2)
        L = 512
        x = rng.standard_normal(L) * 0.05 + np.exp(2j * np.pi * 40 * np.arange(L) / L)
        c = forward_transform(Signal(x, float(L)), build_frame_grid(FrameSpec(s=0.75, length=L, sample_rate=L)))
        assert np.all(c.grid.magnitudes >= 1)
        S = threshold_mask(c, 1e-2, "S")
        R = threshold_mask(c, 1e-2, "R")
        assert not np.any(S & ~R)

    def test_invalid_delta(self):
        c = forward_transform(plane(30, 256), build_frame_grid(FrameSpec(s=0.75, length=256, sample_rate=256)))
        with pytest.raises(ParameterError):
            threshold_mask(c, 0.0)
        with pytest.raises(ParameterError):
            threshold_mask(c, 1e-2, "Q")

"""Benchmark signals, noise processes and their analytic instantaneous frequencies."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InputError, ParameterError
from .wavepacket import Signal

__all__ = ["Signal", "NoiseSpec", "gen_benchmark_1d", "gen_single_chirp", "gen_2d_warped",
           "gen_plane_wave", "add_noise", "snr_db", "oracle_if", "stable_cms", "GENERATORS"]

WHITE = "white_gaussian"
COMPLEX_WHITE = "complex_gaussian"
ALPHA_STABLE = "alpha_stable"


def _grid(fs):
    return np.arange(int(fs)) / fs


def _window(x, start, end):
    return ((x >= start) & (x < end)).astype(np.float64)


def benchmark_components(x):
    """The five raw components (before indicator windows)."""
    x = np.asarray(x, dtype=np.float64)
    return (
        0.6 * np.cos(700 * np.pi * x),
        0.8 * np.cos(300 * np.pi * x),
        0.7 * np.cos(1300 * np.pi * x + 5 * np.sin(20 * np.pi * x)),
        np.sin(80 * np.pi * 100.0 ** (5 * x / 4) / np.log(100.0)),
        3.0 * np.exp(-50 * (x - 0.2) ** 2) * np.cos(50 * (x - 0.2)),
    )


def benchmark_raw(x):
    f1, f2, f3, f4, f5 = benchmark_components(x)
    return (_window(x, 0.0, 0.6) * (f1 + f2) + _window(x, 0.6, 1.0) * f4
            + _window(x, 0.4, 0.8) * f3 + f5)


def gen_benchmark_1d(fs: int = 8192) -> Signal:
    """Real five-component benchmark on [0, 1), L-infinity normalised.

    Indicator windows are half-open ``[start, end)`` on the sample lattice.
    """
    if fs < 4096:
        raise ParameterError(f"benchmark needs fs >= 4096, got {fs}")
    raw = benchmark_raw(_grid(fs))
    peak = float(np.max(np.abs(raw)))
    return Signal(raw / peak, float(fs),
                  {"generator": "benchmark", "fs": fs, "linf_scale": peak})


def gen_single_chirp(fs: int = 1024) -> Signal:
    x = _grid(fs)
    f = np.exp(60j * np.pi * (x + 0.05 * np.cos(2 * np.pi * x)))
    return Signal(f, float(fs), {"generator": "chirp", "fs": fs})


def warped_phase_1d(x):
    return 60.0 * (x + 0.05 * np.sin(2 * np.pi * x))


def gen_2d_warped(fs: int = 512) -> Signal:
    """Separable warped plane wave on [0, 1)^2; ``samples[i1, i2] = f(x1_i1, x2_i2)``."""
    g = np.exp(2j * np.pi * warped_phase_1d(_grid(fs)))
    return Signal(np.outer(g, g), float(fs), {"generator": "warped2d", "fs": fs})


def gen_plane_wave(freq: float, fs: int = 1024) -> Signal:
    f = np.exp(2j * np.pi * freq * _grid(fs))
    return Signal(f, float(fs), {"generator": "plane", "fs": fs, "freq": float(freq)})


@dataclass(frozen=True)
class NoiseSpec:
    """Additive noise description.

    ``white_gaussian`` draws real N(0, variance) samples (added to the real
    part of complex signals); ``complex_gaussian`` draws circular complex
    samples with ``E|e|^2 = variance``. ``alpha_stable`` uses the symmetric
    Chambers-Mallows-Stuck sampler and rescales the draw to ``target_linf``.
    """

    kind: str = WHITE
    variance: float = 0.0
    alpha: float = 1.0
    dispersion: float = 0.9
    loc: float = 1.0
    target_linf: float | None = 15.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (WHITE, COMPLEX_WHITE, ALPHA_STABLE):
            raise ParameterError(f"unknown noise kind {self.kind!r}")
        if self.variance < 0:
            raise ParameterError(f"variance must be >= 0, got {self.variance}")
        if self.kind == ALPHA_STABLE:
            if not (0.0 < self.alpha <= 2.0):
                raise ParameterError(f"alpha must lie in (0, 2], got {self.alpha}")
            if self.dispersion <= 0:
                raise ParameterError(f"dispersion must be positive, got {self.dispersion}")
            if self.target_linf is not None and self.target_linf <= 0:
                raise ParameterError("target L-infinity norm must be positive")

    def to_dict(self):
        return asdict(self)


def stable_cms(alpha, size, rng, scale=1.0, loc=0.0):
    """Symmetric alpha-stable samples (beta = 0) by Chambers-Mallows-Stuck."""
    if not (0.0 < alpha <= 2.0):
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha}")
    phi = rng.uniform(-np.pi / 2, np.pi / 2, size)
    w = rng.exponential(1.0, size)
    if alpha == 1.0:
        x = np.tan(phi)
    else:
        x = (np.sin(alpha * phi) / np.cos(phi) ** (1.0 / alpha)
             * (np.cos((1.0 - alpha) * phi) / w) ** ((1.0 - alpha) / alpha))
    return scale * x + loc


def make_noise(spec: NoiseSpec, shape, rng=None):
    """Noise array and the record of how it was produced."""
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    info = {}
    if spec.kind == WHITE:
        e = rng.standard_normal(shape) * math.sqrt(spec.variance)
    elif spec.kind == COMPLEX_WHITE:
        e = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(spec.variance / 2)
    else:
        # dispersion gamma = scale**alpha
        e = stable_cms(spec.alpha, shape, rng, spec.dispersion ** (1.0 / spec.alpha), spec.loc)
        if spec.target_linf is not None:
            factor = float(np.max(np.abs(e))) / spec.target_linf
            e = e / factor
            info["rescale_factor"] = factor
    return e, info


def add_noise(signal: Signal, spec: NoiseSpec, rng=None) -> Signal:
    """Noisy copy of ``signal``; deterministic for a given ``spec.seed``."""
    x = np.asarray(signal.samples)
    if spec.kind in (WHITE, COMPLEX_WHITE) and spec.variance == 0:
        return Signal(x.copy(), signal.sample_rate, dict(signal.provenance, noise=spec.to_dict()))
    e, info = make_noise(spec, x.shape, rng)
    y = x + e
    prov = dict(signal.provenance, noise=dict(spec.to_dict(), **info))
    prov["snr_db"] = snr_db(x, e)
    return Signal(y, signal.sample_rate, prov)


def _var(z):
    z = np.asarray(z.samples if isinstance(z, Signal) else z)
    return float(np.mean(np.abs(z - z.mean()) ** 2))


def snr_db(f, e) -> float:
    """``10 log10(Var f / Var e)``; ``inf`` for zero-variance noise, ``-inf`` for a constant signal."""
    fs = np.shape(f.samples if isinstance(f, Signal) else f)
    es = np.shape(e.samples if isinstance(e, Signal) else e)
    if fs != es:
        raise InputError(f"shape mismatch {fs} vs {es}")
    ve = _var(e)
    if ve == 0:
        return math.inf
    vf = _var(f)
    if vf == 0:
        return -math.inf
    return 10.0 * math.log10(vf / ve)


def chirp_if(x):
    return 30.0 * (1.0 - 0.1 * np.pi * np.sin(2 * np.pi * np.asarray(x, dtype=np.float64)))


def warped_wave_vector(x1, x2):
    k1 = 60.0 * (1.0 + 0.1 * np.pi * np.cos(2 * np.pi * np.asarray(x1, dtype=np.float64)))
    k2 = 60.0 * (1.0 + 0.1 * np.pi * np.cos(2 * np.pi * np.asarray(x2, dtype=np.float64)))
    return np.stack(np.broadcast_arrays(k1, k2), axis=-1)


def benchmark_if(x):
    """Instantaneous frequencies of the benchmark's components, NaN where absent.

    Columns: f1, f2, f3, f4 (the f5 wavelet has no single frequency).
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.full(x.shape + (4,), np.nan)
    first = (x >= 0.0) & (x < 0.6)
    out[..., 0] = np.where(first, 350.0, np.nan)
    out[..., 1] = np.where(first, 150.0, np.nan)
    mid = (x >= 0.4) & (x < 0.8)
    out[..., 2] = np.where(mid, 650.0 + 50.0 * np.cos(20 * np.pi * x), np.nan)
    last = (x >= 0.6) & (x < 1.0)
    out[..., 3] = np.where(last, 50.0 * 100.0 ** (5 * x / 4), np.nan)
    return out


def oracle_if(generator: str, x, freq: float | None = None):
    """Analytic instantaneous frequency (1D) or local wave vector (2D).

    ``generator`` is one of ``chirp``, ``warped2d`` (``x`` is a pair
    ``(x1, x2)``), ``benchmark`` (per-component columns) or ``plane``
    (needs ``freq``).
    """
    if generator == "chirp":
        return chirp_if(x)
    if generator == "warped2d":
        x1, x2 = x
        return warped_wave_vector(x1, x2)
    if generator == "benchmark":
        return benchmark_if(x)
    if generator == "plane":
        if freq is None:
            raise ParameterError("plane-wave oracle needs its frequency")
        return np.full(np.shape(x), float(freq))
    raise ParameterError(f"no instantaneous-frequency oracle for {generator!r}")


GENERATORS = {
    "chirp": gen_single_chirp,
    "benchmark": gen_benchmark_1d,
    "warped2d": gen_2d_warped,
}

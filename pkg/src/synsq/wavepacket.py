"""Mother wave packets, redundant frame grids and the forward wave packet transform.

Frequencies are in Hz (cycles per unit of the sample axis) and spatial
positions in the same unit as ``1 / sample_rate``. A packet centred at ``a``
has the frequency window ``w_hat(|xi - a| / |a|**s)``, so its support radius is
``|a|**s * d`` for the frequency-compact kind.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate, signal as sps

from .errors import InputError, InvariantError, ParameterError

BUMP = "bump"
SPLINE = "spline"

#: s values in [S_COMPARISON_MIN, 1) are accepted only with ``comparison=True``.
S_COMPARISON_MIN = 0.99


@dataclass(frozen=True)
class MotherWavePacket:
    """Radial mother packet, described by its Fourier profile.

    ``kind="bump"`` is the C-infinity bump ``exp(1 - 1/(1 - (r/d)^2))``, exactly
    zero for ``r >= d`` (type (0, inf); ``m`` is ``None``). ``kind="spline"`` is
    ``sinc(r/d)**m``, the transform of a cardinal B-spline of order ``m``; it is
    compactly supported in time (1D) and decays like ``(1 + r)**-m``, with the
    constant ``eps`` measured at construction.
    """

    kind: str
    m: int | None
    d: float
    eps: float = 0.0

    def raw(self, r):
        r = np.abs(np.asarray(r, dtype=np.float64))
        if self.kind == BUMP:
            u = r / self.d
            out = np.zeros_like(u)
            inside = u < 1.0
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
            return out
        return np.sinc(r / self.d) ** self.m

    @cached_property
    def _norms(self):
        upper = self.d if self.kind == BUMP else np.inf
        lim = 200 if self.kind == BUMP else 2000
        f1 = lambda r: self.raw(r) ** 2  # noqa: E731
        f2 = lambda r: 2.0 * np.pi * r * self.raw(r) ** 2  # noqa: E731
        if self.kind == BUMP:
            n1 = 2.0 * integrate.quad(f1, 0.0, upper, limit=lim)[0]
            n2 = integrate.quad(f2, 0.0, upper, limit=lim)[0]
        else:
            # oscillatory tail: integrate lobe by lobe
            n1 = 2.0 * _lobe_integral(f1, self.d)
            n2 = _lobe_integral(f2, self.d)
        return {1: math.sqrt(n1), 2: math.sqrt(n2)}

    def profile(self, r, n: int = 1):
        """Profile with unit L2 norm over R^n, evaluated at radii ``r``."""
        return self.raw(r) / self._norms[n]

    @property
    def support_radius(self) -> float:
        return self.d

    @property
    def compact(self) -> bool:
        return self.kind == BUMP


def _lobe_integral(f, d, lobes=400):
    total = 0.0
    for k in range(lobes):
        total += integrate.quad(f, k * d, (k + 1) * d, limit=100)[0]
    return total


def make_mother_wavepacket(kind: str = BUMP, m: int | None = None, d: float = 1.0) -> MotherWavePacket:
    """Build a mother wave packet.

    For ``kind="spline"`` the decay constant ``eps`` is the measured
    ``sup_{|xi|>1} |w_hat(xi)| (1 + |xi|)**m`` of the 1D unit-norm profile.
    """
    if not (0.0 < d <= 1.0):
        raise ParameterError(f"d must lie in (0, 1], got {d}")
    if kind == BUMP:
        return MotherWavePacket(BUMP, None, float(d), 0.0)
    if kind != SPLINE:
        raise ParameterError(f"unknown mother wave packet kind {kind!r}")
    if m is None or int(m) != m or m < 1:
        raise ParameterError(f"spline packet needs an integer decay order m >= 1, got {m}")
    packet = MotherWavePacket(SPLINE, int(m), float(d), 0.0)
    r = np.concatenate([np.linspace(1.0, 50.0, 200001)[1:], np.geomspace(50.0, 1e5, 20001)])
    eps = float(np.max(np.abs(packet.profile(r)) * (1.0 + r) ** packet.m))
    return MotherWavePacket(SPLINE, int(m), float(d), eps)


@dataclass(frozen=True)
class FrameSpec:
    """Parameters of one frame of a (possibly redundant) wave packet frame."""

    n: int = 1
    s: float = 0.75
    red: int = 1
    frame_index: int = 0
    band: tuple[float, float] | None = None
    mother: MotherWavePacket = field(default_factory=make_mother_wavepacket)
    length: int = 1024
    sample_rate: float = 1024.0
    comparison: bool = False

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ParameterError(f"dimension must be 1 or 2, got {self.n}")
        lo = 0.5
        if self.comparison:
            if not (lo < self.s < 1.0):
                raise ParameterError(f"s must lie in (1/2, 1) even in comparison mode, got {self.s}")
        elif not (lo < self.s < S_COMPARISON_MIN):
            raise ParameterError(
                f"s must lie in (1/2, {S_COMPARISON_MIN}); values closer to 1 need comparison mode, got {self.s}")
        if self.red < 1 or int(self.red) != self.red:
            raise ParameterError(f"red must be a positive integer, got {self.red}")
        if not (0 <= self.frame_index < self.red):
            raise ParameterError(f"frame_index must lie in [0, red), got {self.frame_index}")
        if self.length < 2 or self.sample_rate <= 0:
            raise ParameterError("length must be >= 2 and sample_rate positive")
        if self.band is not None:
            a_min, a_max = self.band
            if not (0.0 < a_min < a_max):
                raise ParameterError(f"band must satisfy 0 < a_min < a_max, got {self.band}")
            if a_max > self.sample_rate / 2 + 1e-9:
                raise ParameterError(f"band upper edge {a_max} exceeds Nyquist {self.sample_rate / 2}")
        if self.mother.kind == SPLINE:
            need = math.ceil(2.0 / (1.0 - self.s)) + 4
            if self.mother.m < need:
                raise ParameterError(
                    f"spline packet with s={self.s} needs m >= ceil(2/(1-s))+4 = {need}, got m={self.mother.m}")

    @property
    def resolution(self) -> float:
        return self.sample_rate / self.length

    def radius(self, a):
        return np.abs(a) ** self.s * self.mother.d

    def effective_band(self) -> tuple[float, float]:
        if self.band is not None:
            return (float(self.band[0]), float(self.band[1]))
        # low edge where the support spans at least two frequency bins
        df = self.resolution
        lo = max(2.0 * df, (2.0 * df / self.mother.d) ** (1.0 / self.s))
        return (lo, self.sample_rate / 2)


@dataclass(frozen=True)
class FrameGrid:
    spec: FrameSpec
    centers: np.ndarray       # (nc,) in 1D, (nc, 2) in 2D; sorted by |a|
    radii: np.ndarray         # (nc,) support radius |a|**s * d
    angular_width: np.ndarray | None = None

    @property
    def n_centers(self) -> int:
        return len(self.radii)

    @property
    def magnitudes(self) -> np.ndarray:
        c = self.centers
        return np.abs(c) if c.ndim == 1 else np.hypot(c[:, 0], c[:, 1])


def _radial_lattice(spec: FrameSpec, lo: float, hi: float) -> np.ndarray:
    base = [lo]
    while base[-1] < hi:
        base.append(base[-1] + float(spec.radius(base[-1])))
    base.append(base[-1] + float(spec.radius(base[-1])))
    base = np.array(base)
    frac = spec.frame_index / spec.red
    shifted = base[:-1] + frac * np.diff(base)
    # keep centres whose support reaches the band
    reach = spec.radius(shifted)
    keep = (shifted - reach < hi) & (shifted + reach > lo)
    return shifted[keep]


def build_frame_grid(spec: FrameSpec) -> FrameGrid:
    """Place the frequency centres of frame ``spec.frame_index``.

    Radially, consecutive centres are one support radius apart, so adjacent
    supports overlap by at least half the smaller radius. Frame ``j`` of
    ``red`` shifts every centre by ``j/red`` of the local spacing (and, in 2D,
    rotates each ring by ``j/red`` of its angular spacing).
    """
    lo, hi = spec.effective_band()
    if hi > spec.sample_rate / 2 + 1e-9:
        raise ParameterError(f"band upper edge {hi} exceeds Nyquist")
    rho = _radial_lattice(spec, lo, hi)
    if spec.n == 1:
        return FrameGrid(spec, rho, spec.radius(rho))

    centers, widths = [], []
    frac = spec.frame_index / spec.red
    for r0 in rho:
        rad = float(spec.radius(r0))
        ndir = max(8, math.ceil(2.0 * math.pi * r0 / rad))
        theta = 2.0 * math.pi * (np.arange(ndir) + frac) / ndir
        centers.append(np.column_stack([r0 * np.cos(theta), r0 * np.sin(theta)]))
        widths.append(np.full(ndir, 2.0 * math.asin(min(1.0, rad / r0))))
    centers = np.concatenate(centers)
    return FrameGrid(spec, centers, spec.radius(np.hypot(centers[:, 0], centers[:, 1])),
                     np.concatenate(widths))


def covered(grid: FrameGrid, freqs) -> np.ndarray:
    """Boolean array: is each frequency (or 2-vector) inside some support?"""
    freqs = np.asarray(freqs, dtype=np.float64)
    if grid.spec.n == 1:
        dist = np.abs(freqs[:, None] - grid.centers[None, :])
    else:
        dist = np.hypot(freqs[:, None, 0] - grid.centers[None, :, 0],
                        freqs[:, None, 1] - grid.centers[None, :, 1])
    return np.any(dist <= grid.radii[None, :], axis=1)


@dataclass
class Signal:
    """Uniformly sampled 1D or 2D data; axis ``k`` of ``samples`` is ``x_{k+1}``."""

    samples: np.ndarray
    sample_rate: float
    provenance: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.samples.ndim

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.samples)


@dataclass
class WPCoefficients:
    """Transform output.

    ``W`` has shape ``(nc, *b_shape)``; ``G`` has shape ``(n, nc, *b_shape)``
    holding the spatial gradient components. In 2D, ``b_shape`` is
    ``(len(x1), len(rows))``.
    """

    grid: FrameGrid
    W: np.ndarray
    G: np.ndarray
    b_lattice: tuple

    @property
    def spec(self) -> FrameSpec:
        return self.grid.spec


def _next_pow2(k: int) -> int:
    return 1 << (int(k) - 1).bit_length()


def analytic(x: np.ndarray) -> np.ndarray:
    """Zero negative frequencies and double positive ones along every axis' FFT.

    In 2D the half-plane ``xi_1 > 0`` (plus half of the ``xi_1 = 0`` line) is
    kept; for 1D this is the usual analytic signal.
    """
    X = np.fft.fftn(x)
    if x.ndim == 1:
        L = x.shape[0]
        h = np.zeros(L)
        h[0] = 1.0
        h[1:(L + 1) // 2] = 2.0
        if L % 2 == 0:
            h[L // 2] = 1.0
        return np.fft.ifft(X * h)
    L1, L2 = x.shape
    h1 = np.zeros(L1)
    h1[0] = 1.0
    h1[1:(L1 + 1) // 2] = 2.0
    if L1 % 2 == 0:
        h1[L1 // 2] = 1.0
    return np.fft.ifftn(X * h1[:, None])


def prepare_signal(signal: Signal) -> Signal:
    """Validate, resample each axis to a power of two, and make real data analytic."""
    x = np.asarray(signal.samples)
    if x.ndim not in (1, 2):
        raise InputError(f"signal must be 1D or 2D, got {x.ndim} axes")
    if not np.all(np.isfinite(x)):
        raise InputError("signal contains NaN or Inf")
    fs = float(signal.sample_rate)
    target = tuple(_next_pow2(k) for k in x.shape)
    if target != x.shape:
        warnings.warn(f"resampling signal from {x.shape} to {target} samples", stacklevel=2)
        for axis, k in enumerate(target):
            fs = fs * k / x.shape[axis]
            x = sps.resample(x, k, axis=axis)
    if not np.iscomplexobj(x):
        x = analytic(x)
    return Signal(np.asarray(x, dtype=np.complex128), fs, dict(signal.provenance))


def _windows_1d(grid: FrameGrid, xi: np.ndarray) -> np.ndarray:
    spec = grid.spec
    a = grid.centers[:, None]
    wnd = spec.mother.profile((xi[None, :] - a) / np.abs(a) ** spec.s, 1)
    norm = np.sqrt(np.sum(wnd ** 2, axis=1, keepdims=True))
    if np.any(norm == 0):
        raise InvariantError("a frame centre has an empty discrete window")
    return wnd / norm


def forward_transform(signal: Signal, grid: FrameGrid, rows=None) -> WPCoefficients:
    """Wave packet coefficients and their spatial gradient via the FFT.

    Every discrete packet is normalised to unit norm on the sampling grid, i.e.
    ``sum_k |w_hat_ab(xi_k)|**2 = 1`` over the DFT frequencies; this is the
    discrete counterpart of the ``|a|**(n s / 2)`` dilation factor.

    ``rows`` (2D only) selects which ``x2`` sample indices to evaluate; by
    default all are computed.
    """
    if grid.n_centers == 0:
        raise InputError("frame grid has no centres")
    sig = prepare_signal(signal)
    x = sig.samples
    spec = grid.spec
    if x.ndim != spec.n:
        raise InputError(f"signal has {x.ndim} axes but frame is {spec.n}D")
    if x.ndim == 1:
        L = x.shape[0]
        xi = np.fft.fftfreq(L, d=1.0 / sig.sample_rate)
        X = np.fft.fft(x)
        wnd = _windows_1d(grid, xi)
        spec_w = X[None, :] * wnd
        W = np.fft.ifft(spec_w, axis=1)
        G = np.fft.ifft(spec_w * (2j * np.pi * xi)[None, :], axis=1)[None]
        return WPCoefficients(grid, W, G, (np.arange(L) / sig.sample_rate,))
    return _forward_2d(sig, grid, rows)


def _forward_2d(sig: Signal, grid: FrameGrid, rows) -> WPCoefficients:
    x = sig.samples
    L1, L2 = x.shape
    fs = sig.sample_rate
    rows = np.arange(L2) if rows is None else np.atleast_1d(np.asarray(rows, dtype=np.int64))
    if rows.size == 0 or rows.min() < 0 or rows.max() >= L2:
        raise InputError(f"rows must index [0, {L2})")
    spec = grid.spec
    mother = spec.mother
    xi1 = np.fft.fftfreq(L1, d=1.0 / fs)
    xi2 = np.fft.fftfreq(L2, d=1.0 / fs)
    X = np.fft.fft2(x)
    x2 = rows / fs
    nc = grid.n_centers
    W = np.empty((nc, L1, rows.size), dtype=np.complex128)
    G = np.empty((2, nc, L1, rows.size), dtype=np.complex128)
    for i, (a1, a2) in enumerate(grid.centers):
        scale = math.hypot(a1, a2) ** spec.s
        if mother.compact:
            reach = scale * mother.d
            k2 = np.nonzero(np.abs(xi2 - a2) < reach)[0]
            k1 = np.nonzero(np.abs(xi1 - a1) < reach)[0]
        else:
            k2 = np.arange(L2)
            k1 = np.arange(L1)
        if k1.size == 0 or k2.size == 0:
            raise InvariantError(f"frame centre ({a1:.3g}, {a2:.3g}) has an empty discrete window")
        r = np.hypot(xi1[k1, None] - a1, xi2[None, k2] - a2) / scale
        wnd = mother.profile(r, 2)
        norm = math.sqrt(float(np.sum(wnd ** 2)))
        if norm == 0:
            raise InvariantError(f"frame centre ({a1:.3g}, {a2:.3g}) has an empty discrete window")
        sub = np.zeros((L1, k2.size), dtype=np.complex128)
        sub[k1, :] = X[np.ix_(k1, k2)] * (wnd / norm)
        # inverse along xi1 on the occupied xi2 columns, then evaluate the
        # xi2 synthesis only at the requested rows
        Y = np.fft.ifft(sub, axis=0)
        Yd = np.fft.ifft(sub * (2j * np.pi * xi1)[:, None], axis=0)
        E = np.exp(2j * np.pi * np.outer(xi2[k2], x2)) / L2
        W[i] = Y @ E
        G[0, i] = Yd @ E
        G[1, i] = Y @ (E * (2j * np.pi * xi2[k2])[:, None])
    b = (np.arange(L1) / fs, x2)
    return WPCoefficients(grid, W, G, b)


def threshold_mask(coeffs: WPCoefficients, delta: float, mode: str = "R") -> np.ndarray:
    """Coefficients passing ``|W| >= |a|**(-n s / 2) * delta`` (R) or ``|W| >= delta`` (S)."""
    if delta <= 0:
        raise ParameterError(f"threshold must be positive, got {delta}")
    mag = np.abs(coeffs.W)
    if mode == "S":
        return mag >= delta
    if mode != "R":
        raise ParameterError(f"threshold mode must be 'R' or 'S', got {mode!r}")
    spec = coeffs.spec
    level = coeffs.grid.magnitudes ** (-spec.n * spec.s / 2.0) * delta
    return mag >= level.reshape((-1,) + (1,) * (mag.ndim - 1))

"""Information function and synchrosqueezed energy distributions."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import InputError, InvariantError, ParameterError
from .wavepacket import (FrameSpec, Signal, WPCoefficients, build_frame_grid,
                         forward_transform, threshold_mask)

FULL = "full"
SELECTIVE_MAX = "selective_max"


@dataclass(frozen=True)
class VGrid:
    """Bin centres ``v_min, v_min + dv, ..., v_max`` on each axis.

    A value belongs to the bin whose centre is nearest.
    """

    v_min: tuple
    v_max: tuple
    dv: tuple

    def __post_init__(self):
        for lo, hi, dv in zip(self.v_min, self.v_max, self.dv):
            if dv <= 0:
                raise ParameterError(f"bin width must be positive, got {dv}")
            if hi < lo:
                raise ParameterError(f"v_max {hi} below v_min {lo}")

    @classmethod
    def uniform(cls, v_min, v_max, dv=1.0, n=1):
        return cls((float(v_min),) * n, (float(v_max),) * n, (float(dv),) * n)

    @property
    def ndim(self) -> int:
        return len(self.dv)

    @property
    def shape(self) -> tuple:
        return tuple(int(round((hi - lo) / dv)) + 1 for lo, hi, dv in zip(self.v_min, self.v_max, self.dv))

    def axis(self, k: int) -> np.ndarray:
        return self.v_min[k] + self.dv[k] * np.arange(self.shape[k])

    def index(self, v, k: int = 0) -> np.ndarray:
        """Bin index per value; -1 for values outside the grid (or NaN)."""
        v = np.asarray(v, dtype=np.float64)
        with np.errstate(invalid="ignore"):
            idx = np.floor((v - self.v_min[k]) / self.dv[k] + 0.5)
            ok = (idx >= 0) & (idx < self.shape[k])
        return np.where(ok, idx, -1).astype(np.int64)


@dataclass(frozen=True)
class SqueezeConfig:
    delta: float = 1e-2
    threshold_mode: str = "R"
    v_grid: VGrid | None = None
    dv: float = 1.0
    mode: str = FULL
    rows: tuple | None = None

    def __post_init__(self):
        if self.delta <= 0:
            raise ParameterError(f"threshold must be positive, got {self.delta}")
        if self.threshold_mode not in ("R", "S"):
            raise ParameterError(f"threshold mode must be 'R' or 'S', got {self.threshold_mode!r}")
        if self.mode not in (FULL, SELECTIVE_MAX):
            raise ParameterError(f"mode must be {FULL!r} or {SELECTIVE_MAX!r}, got {self.mode!r}")
        if self.dv <= 0:
            raise ParameterError(f"bin width must be positive, got {self.dv}")

    def resolve_vgrid(self, spec: FrameSpec) -> VGrid:
        if self.v_grid is not None:
            vg = self.v_grid
            if vg.ndim != spec.n:
                raise ParameterError(f"v-grid has {vg.ndim} axes, frame is {spec.n}D")
            if min(vg.v_min) < 0 and spec.n == 1:
                raise ParameterError("1D v-grid must start at v_min >= 0")
            if max(vg.v_max) > spec.sample_rate / 2 + 1e-9:
                raise ParameterError("v_max exceeds the Nyquist frequency")
            return vg
        lo, hi = spec.effective_band()
        if spec.n == 1:
            lo = self.dv * np.floor(lo / self.dv)
            hi = self.dv * np.ceil(hi / self.dv)
            return VGrid.uniform(max(lo, 0.0), min(hi, spec.sample_rate / 2), self.dv)
        hi = self.dv * np.floor(hi / self.dv)
        return VGrid.uniform(-hi, hi, self.dv, n=2)


@dataclass
class TFDistribution:
    """Nonnegative distribution ``T`` with axes ``(*v_axes, *b_axes)``."""

    T: np.ndarray
    v_grid: VGrid
    b_lattice: tuple
    meta: dict = field(default_factory=dict)
    dropped: int = 0
    retained_energy: float = 0.0

    @property
    def total(self) -> float:
        return float(self.T.sum())


def information_function(coeffs: WPCoefficients, mask: np.ndarray) -> np.ndarray:
    """``Re(grad_b W / (2 pi i W))`` per component at masked points, NaN elsewhere.

    Output shape is ``(n, nc, *b_shape)``.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != coeffs.W.shape:
        raise InputError("mask shape does not match the coefficients")
    W = coeffs.W[mask]
    if W.size and np.min(np.abs(W)) < 1e-30:
        raise InvariantError("mask selects a coefficient with |W| < 1e-30")
    v = np.full(coeffs.G.shape, np.nan)
    for k in range(coeffs.G.shape[0]):
        v[k][mask] = np.real(coeffs.G[k][mask] / (2j * np.pi * W))
    return v


def _flat_bins(v_field: np.ndarray, vg: VGrid, b_shape: tuple) -> np.ndarray:
    """Flattened index into ``(*v_shape, *b_shape)`` per coefficient, -1 if dropped."""
    nb = int(np.prod(b_shape))
    idx = np.zeros(v_field.shape[1:], dtype=np.int64)
    ok = np.ones(v_field.shape[1:], dtype=bool)
    for k in range(vg.ndim):
        ik = vg.index(v_field[k], k)
        ok &= ik >= 0
        idx = idx * vg.shape[k] + ik
    bpos = np.broadcast_to(np.arange(nb).reshape(b_shape), idx.shape)
    flat = idx * nb + bpos
    return np.where(ok, flat, -1)


def squeeze(coeffs: WPCoefficients, v_field: np.ndarray, config: SqueezeConfig,
            select: np.ndarray | None = None) -> TFDistribution:
    """Reassign ``|W|**2`` of every estimated coefficient to the bin of its estimate.

    Points with a NaN estimate are unmasked. ``select`` optionally restricts
    the reassignment further (used by the selective-max mode).
    """
    vg = config.resolve_vgrid(coeffs.spec)
    b_shape = coeffs.W.shape[1:]
    has = ~np.isnan(v_field[0])
    if select is not None:
        has &= select
    flat = _flat_bins(v_field, vg, b_shape)
    power = np.abs(coeffs.W) ** 2
    chosen = has.ravel()
    bins = flat.ravel()[chosen]
    weights = power.ravel()[chosen]
    dropped = int(np.count_nonzero(bins < 0))
    size = int(np.prod(vg.shape)) * int(np.prod(b_shape))
    T = kernels.accumulate(np.ascontiguousarray(bins), np.ascontiguousarray(weights), size)
    T = T.reshape(vg.shape + b_shape)
    spec = coeffs.spec
    meta = {"s": spec.s, "red": spec.red, "frame_index": spec.frame_index,
            "mode": config.mode, "delta": config.delta, "threshold_mode": config.threshold_mode,
            "band": list(spec.effective_band())}
    return TFDistribution(T, vg, coeffs.b_lattice, meta, dropped, float(weights[bins >= 0].sum()))


def selective_mask(coeffs: WPCoefficients, mask: np.ndarray) -> np.ndarray:
    """At each position keep only the masked coefficient of largest ``|W|``.

    Ties go to the smaller ``|a|`` (centres are sorted by ``|a|``).
    """
    nc = coeffs.W.shape[0]
    power = np.ascontiguousarray((np.abs(coeffs.W) ** 2).reshape(nc, -1))
    m = np.ascontiguousarray(np.asarray(mask, dtype=np.uint8).reshape(nc, -1))
    best = kernels.select_max(power, m)
    keep = np.zeros_like(m, dtype=bool)
    cols = np.nonzero(best >= 0)[0]
    keep[best[cols], cols] = True
    return keep.reshape(coeffs.W.shape)


def single_frame_sst(signal: Signal, spec: FrameSpec, config: SqueezeConfig) -> TFDistribution:
    grid = build_frame_grid(spec)
    coeffs = forward_transform(signal, grid, rows=config.rows)
    mask = threshold_mask(coeffs, config.delta, config.threshold_mode)
    v = information_function(coeffs, mask)
    select = selective_mask(coeffs, mask) if config.mode == SELECTIVE_MAX else None
    return squeeze(coeffs, v, config, select)


def _workers(workers):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("SYNSQ_THREADS")
    return max(1, int(env)) if env else 1


def frame_distributions(signal: Signal, spec: FrameSpec, config: SqueezeConfig,
                        workers: int | None = None) -> list[TFDistribution]:
    """One distribution per frame index ``0 .. red-1``, in frame order."""
    specs = [replace(spec, frame_index=j) for j in range(spec.red)]
    nw = min(_workers(workers), len(specs))
    if nw == 1:
        return [single_frame_sst(signal, sp, config) for sp in specs]
    with ThreadPoolExecutor(nw) as pool:
        return list(pool.map(lambda sp: single_frame_sst(signal, sp, config), specs))


def redundant_sst(signal: Signal, spec: FrameSpec, config: SqueezeConfig,
                  workers: int | None = None) -> TFDistribution:
    """Arithmetic mean of the per-frame distributions over all ``red`` frames."""
    frames = frame_distributions(signal, spec, config, workers)
    T = frames[0].T.copy()
    for fr in frames[1:]:
        T += fr.T
    T /= len(frames)
    meta = dict(frames[0].meta)
    meta.pop("frame_index")
    meta["red"] = spec.red
    return TFDistribution(T, frames[0].v_grid, frames[0].b_lattice, meta,
                          sum(f.dropped for f in frames),
                          sum(f.retained_energy for f in frames) / len(frames))


def selective_max_sst(signal: Signal, spec: FrameSpec, config: SqueezeConfig,
                      workers: int | None = None) -> TFDistribution:
    if config.mode != SELECTIVE_MAX:
        config = replace(config, mode=SELECTIVE_MAX)
    return redundant_sst(signal, spec, config, workers)


def stack_2d(tf: TFDistribution, fixed_x2: int = 0) -> TFDistribution:
    """Sum a 2D distribution over ``v2`` at row ``fixed_x2`` of its b-lattice.

    Returns a ``(v1, x1)`` distribution.
    """
    if tf.T.ndim != 4:
        raise InputError("stack_2d needs a 4-axis (v1, v2, x1, x2) distribution")
    nrow = tf.T.shape[3]
    if not (0 <= fixed_x2 < nrow):
        raise InputError(f"x2 index {fixed_x2} out of range [0, {nrow})")
    S = tf.T[:, :, :, fixed_x2].sum(axis=1)
    vg = VGrid((tf.v_grid.v_min[0],), (tf.v_grid.v_max[0],), (tf.v_grid.dv[0],))
    meta = dict(tf.meta, stacked_x2=float(tf.b_lattice[1][fixed_x2]))
    return TFDistribution(S, vg, (tf.b_lattice[0],), meta, 0, float(S.sum()))

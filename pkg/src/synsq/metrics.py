"""Earth mover's distance between a distribution and its ideal ridge."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InputError
from .synchrosqueeze import TFDistribution, VGrid


@dataclass
class IdealDistribution:
    """One-hot ridge: ``hot[b]`` is the bin of the oracle frequency at ``b`` (-1 if out of grid)."""

    hot: np.ndarray
    v_grid: VGrid
    b_lattice: np.ndarray

    @property
    def D(self) -> np.ndarray:
        nv = self.v_grid.shape[0]
        D = np.zeros((nv, len(self.hot)))
        ok = self.hot >= 0
        D[self.hot[ok], np.nonzero(ok)[0]] = 1.0
        return D

    @property
    def out_of_band(self) -> int:
        return int(np.count_nonzero(self.hot < 0))


@dataclass
class EMDResult:
    value: float
    per_slice: np.ndarray
    used: int
    excluded: int


def ideal_distribution(oracle, v_grid: VGrid, b_lattice) -> IdealDistribution:
    """``oracle`` is a callable of positions or an array of frequencies per position."""
    if v_grid.ndim != 1:
        raise InputError("ideal distributions are defined on a 1D v-grid")
    b = np.asarray(b_lattice, dtype=np.float64)
    q = oracle(b) if callable(oracle) else np.asarray(oracle, dtype=np.float64)
    if q.shape != b.shape:
        raise InputError("oracle output does not match the b-lattice")
    return IdealDistribution(v_grid.index(q, 0), v_grid, b)


def _same_grid(a: VGrid, b: VGrid) -> bool:
    return a.shape == b.shape and np.allclose(a.v_min, b.v_min) and np.allclose(a.dv, b.dv)


def emd_score(tf: TFDistribution, ideal: IdealDistribution) -> EMDResult:
    """Mean 1D EMD (in Hz) over positions where both slices carry mass.

    Each ``T`` slice is L1-normalised first. Slices with no mass in ``T`` or
    an out-of-grid oracle are excluded and counted.
    """
    T = np.asarray(tf.T, dtype=np.float64)
    if T.ndim != 2 or not _same_grid(tf.v_grid, ideal.v_grid) or T.shape[1] != len(ideal.hot):
        raise InputError("distribution and ideal distribution are on different grids")
    if np.any(T < 0):
        raise InputError("distribution has negative entries")
    per, valid = kernels.emd_slices(np.ascontiguousarray(T), np.ascontiguousarray(ideal.hot, dtype=np.int64),
                                    float(ideal.v_grid.dv[0]))
    used = int(np.count_nonzero(valid))
    if used == 0:
        raise InputError("no position has mass in both distributions")
    per = np.where(valid, per, np.nan)
    return EMDResult(float(np.nanmean(per)), per, used, len(valid) - used)


def emd_1d(p, q, dv: float = 1.0) -> float:
    """EMD between two histograms on the same unit-spaced grid via CDF differences."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise InputError("histograms differ in length")
    return float(np.sum(np.abs(np.cumsum(p / p.sum()) - np.cumsum(q / q.sum()))) * dv)


def emd_lp_oracle(p, q, dv: float = 1.0) -> float:
    """Exact transport cost by greedy mass matching (optimal for 1D ground distance)."""
    p = [float(t) for t in p]
    q = [float(t) for t in q]
    if len(p) != len(q) or len(p) > 32:
        raise InputError("oracle histograms must share a length <= 32")
    if abs(sum(p) - 1.0) > 1e-9 or abs(sum(q) - 1.0) > 1e-9 or min(p + q) < 0:
        raise InputError("oracle histograms must be nonnegative and sum to 1")
    i = j = 0
    cost = 0.0
    while i < len(p) and j < len(q):
        if p[i] <= 1e-15:
            i += 1
            continue
        if q[j] <= 1e-15:
            j += 1
            continue
        moved = min(p[i], q[j])
        cost += moved * abs(i - j)
        p[i] -= moved
        q[j] -= moved
    return cost * dv

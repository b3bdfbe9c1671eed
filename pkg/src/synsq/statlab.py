"""Seeded Monte-Carlo experiments over the synchrosqueezing pipeline.

Every trial draws its noise from ``SeedSequence([base_seed, stream, trial])``,
so results do not depend on execution order or worker count. The stream is
the cell index, except where trials are deliberately paired: EMD tables share
noise across cells with the same variance, and the component test shares it
across conditions.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.optimize import brentq

from . import __version__
from .errors import ParameterError
from .metrics import emd_score, ideal_distribution
from .signals import (NoiseSpec, add_noise, chirp_if, gen_2d_warped, gen_plane_wave,
                      gen_single_chirp, warped_wave_vector)
from .synchrosqueeze import SELECTIVE_MAX, SqueezeConfig, redundant_sst, stack_2d
from .wavepacket import (S_COMPARISON_MIN, FrameGrid, FrameSpec, Signal, build_frame_grid,
                         forward_transform, threshold_mask)

EMD_VS_RED = "emd_vs_red"
EMD_VS_NOISE = "emd_vs_noise"
PROB_ESTIMATE = "prob_estimate"
COMPONENT_TEST = "component_test"
COEFF_VARIANCE = "coeff_variance"
KINDS = (EMD_VS_RED, EMD_VS_NOISE, PROB_ESTIMATE, COMPONENT_TEST, COEFF_VARIANCE)

#: the s = 1 comparison curve is run just inside the valid range
S_ONE = 1.0 - 1e-3

CHIRP_BAND = (5.0, 80.0)

DEFAULT_AXES = {
    EMD_VS_RED: {"red": [1, 2, 4, 6, 8, 10, 12, 16], "variance": [0.0, 0.5, 1.0, 2.0, 4.0]},
    EMD_VS_NOISE: {"s": [0.625, 0.75, 0.875, S_ONE], "variance": [0.0, 0.5, 1.0, 2.0, 3.0, 4.0]},
    PROB_ESTIMATE: {"N": [64, 128, 256], "s": [0.625, 0.75, 0.875], "variance": [1.0]},
    COMPONENT_TEST: {"condition": ["signal+5", "signal+10", "noise"]},
    COEFF_VARIANCE: {"variance": [1.0]},
}

DEFAULT_PARAMS = {
    EMD_VS_RED: {"s": 0.75, "fs": 1024, "band": list(CHIRP_BAND), "delta": 1e-2, "dv": 1.0},
    EMD_VS_NOISE: {"red": 10, "fs": 1024, "band": list(CHIRP_BAND), "delta": 1e-2, "dv": 1.0},
    PROB_ESTIMATE: {"fs": 1024, "tol": 0.05, "delta": 1e-2, "candidates": 16},
    COMPONENT_TEST: {"s": 0.625, "red": 10, "fs": 256, "band": [20.0, 120.0], "delta": 1e-2,
                     "dv": 2.0, "hit_bins": 2},
    COEFF_VARIANCE: {"s": 0.75, "fs": 1024, "points": 8},
}

DEFAULT_TRIALS = {EMD_VS_RED: 20, EMD_VS_NOISE: 20, PROB_ESTIMATE: 200, COMPONENT_TEST: 20,
                  COEFF_VARIANCE: 500}


@dataclass
class ExperimentPlan:
    kind: str
    axes: dict = field(default_factory=dict)
    trials: int | None = None
    seed: int = 0
    params: dict = field(default_factory=dict)
    output: str | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        axes = dict(DEFAULT_AXES[self.kind])
        unknown = set(self.axes) - set(axes)
        if unknown:
            raise ParameterError(f"unknown axes for {self.kind}: {sorted(unknown)}")
        axes.update(self.axes)
        for name, values in axes.items():
            if not isinstance(values, (list, tuple)) or len(values) == 0:
                raise ParameterError(f"axis {name!r} must be a nonempty list")
        self.axes = {k: list(v) for k, v in axes.items()}
        params = dict(DEFAULT_PARAMS[self.kind])
        unknown = set(self.params) - set(params)
        if unknown:
            raise ParameterError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        params.update(self.params)
        self.params = params
        if self.trials is None:
            self.trials = DEFAULT_TRIALS[self.kind]
        if int(self.trials) != self.trials or self.trials < 1:
            raise ParameterError(f"trials must be a positive integer, got {self.trials}")
        self.trials = int(self.trials)

    def cells(self):
        names = list(self.axes)
        for values in itertools.product(*(self.axes[n] for n in names)):
            yield dict(zip(names, values))


@dataclass
class ExperimentTable:
    """Rows of ``(axes..., mean, std, trials, seed, extras...)``."""

    kind: str
    axis_names: list
    rows: list
    seed: int
    extra_columns: list = field(default_factory=list)
    header: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def columns(self):
        return list(self.axis_names) + ["mean", "std", "trials", "seed"] + list(self.extra_columns)

    def row(self, **axes):
        for r in self.rows:
            if all(_eq(r[k], v) for k, v in axes.items()):
                return r
        raise KeyError(axes)

    def to_csv(self) -> str:
        buf = io.StringIO()
        head = {"kind": self.kind, "seed": self.seed, "version": __version__, **self.header}
        for key in sorted(head):
            buf.write(f"# {key}={_fmt(head[key])}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for r in self.rows:
            writer.writerow([_fmt(r[c]) for c in self.columns])
        return buf.getvalue()

    def write(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def _eq(a, b):
    if isinstance(a, float) or isinstance(b, float):
        try:
            return math.isclose(float(a), float(b), rel_tol=1e-12, abs_tol=0.0)
        except (TypeError, ValueError):
            return False
    return a == b


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return ":".join(str(_fmt(t)) for t in v)
    return v


def trial_seed(base_seed: int, cell: int, trial: int) -> int:
    """64-bit noise seed for one trial of one cell."""
    return int(np.random.SeedSequence([int(base_seed), int(cell), int(trial)]).generate_state(1, np.uint64)[0])


def _workers(n):
    if n is not None:
        return max(1, int(n))
    env = os.environ.get("SYNSQ_THREADS")
    return max(1, int(env)) if env else 1


def _map(fn, jobs, workers):
    nw = min(_workers(workers), len(jobs))
    if nw <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(nw) as pool:
        return list(pool.map(fn, jobs))


def _summary(values):
    v = np.asarray(values, dtype=np.float64)
    std = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return float(v.mean()), std


# -- EMD experiments ---------------------------------------------------------

def chirp_emd(signal: Signal, spec: FrameSpec, config: SqueezeConfig) -> float:
    tf = redundant_sst(signal, spec, config)
    ideal = ideal_distribution(chirp_if, tf.v_grid, tf.b_lattice[0])
    return emd_score(tf, ideal).value


def _chirp_spec(s, red, params):
    fs = int(params["fs"])
    return FrameSpec(n=1, s=float(s), red=int(red), band=tuple(params["band"]), length=fs,
                     sample_rate=float(fs), comparison=float(s) >= S_COMPARISON_MIN)


def _emd_table(plan: ExperimentPlan, spec_of) -> ExperimentTable:
    p = plan.params
    clean = gen_single_chirp(int(p["fs"]))
    config = SqueezeConfig(delta=float(p["delta"]), dv=float(p["dv"]))
    cells = list(plan.cells())
    jobs = [(ci, t) for ci in range(len(cells)) for t in range(plan.trials)]

    variances = [float(v) for v in plan.axes["variance"]]

    def one(job):
        ci, t = job
        cell = cells[ci]
        # common noise across the red / s axis: comparisons along it are paired
        vi = variances.index(float(cell["variance"]))
        noisy = add_noise(clean, NoiseSpec(variance=variances[vi], seed=trial_seed(plan.seed, vi, t)))
        return chirp_emd(noisy, spec_of(cell), config)

    values = _map(one, jobs, plan.workers)
    rows, raw = [], {}
    for ci, cell in enumerate(cells):
        vals = values[ci * plan.trials:(ci + 1) * plan.trials]
        mean, std = _summary(vals)
        row = dict(cell, mean=mean, std=std, trials=plan.trials, seed=plan.seed)
        if "s" in cell:
            row["comparison"] = float(cell["s"]) >= S_COMPARISON_MIN
        rows.append(row)
        raw[tuple(cell.values())] = np.asarray(vals)
    extra = ["comparison"] if "s" in plan.axes else []
    header = {f"param.{k}": v for k, v in sorted(p.items())}
    return ExperimentTable(plan.kind, list(plan.axes), rows, plan.seed, extra, header, raw)


def run_emd_vs_red(plan: ExperimentPlan) -> ExperimentTable:
    """Mean/std chirp EMD per ``(red, variance)`` at fixed ``s``."""
    s = plan.params["s"]
    return _emd_table(plan, lambda cell: _chirp_spec(s, cell["red"], plan.params))


def run_emd_vs_noise(plan: ExperimentPlan) -> ExperimentTable:
    """Mean/std chirp EMD per ``(s, variance)`` at fixed ``red``.

    Rows with ``s >= 0.99`` stand in for the wavelet-like ``s = 1`` case and
    carry ``comparison=1``.
    """
    red = plan.params["red"]
    return _emd_table(plan, lambda cell: _chirp_spec(cell["s"], red, plan.params))


# -- probability of a good estimate --------------------------------------------

@dataclass
class ProbabilityEstimate:
    p: float
    lo: float
    hi: float
    successes: int
    trials: int
    empty: int

    @property
    def half_width(self) -> float:
        return (self.hi - self.lo) / 2


def wilson_interval(k: int, n: int, level: float = 0.95):
    z = stats.norm.ppf(0.5 + level / 2)
    p = k / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def z_range(N: float, s: float, d: float = 1.0):
    """Frequencies ``a`` with ``|a - N| <= |a|**s * d``."""
    lo = brentq(lambda a: N - a - a ** s * d, 1e-12, N)
    hi = brentq(lambda a: a - a ** s * d - N, N, 2 * N + 4 * N ** s * d + 1)
    return lo, hi


def estimate_probability(N: float, s: float, variance: float, tol: float = 0.05, trials: int = 200,
                         seed: int = 0, fs: int = 1024, delta: float = 1e-2, candidates: int = 16,
                         cell: int = 0, workers=None) -> ProbabilityEstimate:
    """Fraction of trials whose IF estimate at a random point of ``Z_1 ∩ S_delta`` is good.

    The signal is the plane wave ``exp(2 pi i N x)`` plus real white noise.
    Each trial evaluates ``candidates`` packets with centres drawn uniformly
    from ``Z_1`` and picks one ``(a, b)`` uniformly among those passing the
    unscaled threshold; success means ``|v - N| / N <= tol``. Trials with no
    surviving point count as failures and are reported in ``empty``.
    """
    if N >= fs / 2:
        raise ParameterError(f"N={N} must lie below Nyquist {fs / 2}")
    clean = gen_plane_wave(N, fs)
    spec = FrameSpec(n=1, s=s, length=fs, sample_rate=float(fs), comparison=s >= S_COMPARISON_MIN)
    lo, hi = z_range(N, s, spec.mother.d)
    hi = min(hi, fs / 2)

    def one(t):
        ts = trial_seed(seed, cell, t)
        rng = np.random.default_rng([ts, 1])
        noisy = add_noise(clean, NoiseSpec(variance=variance, seed=ts))
        a = np.sort(rng.uniform(lo, hi, candidates))
        grid = FrameGrid(spec, a, spec.radius(a))
        coeffs = forward_transform(noisy, grid)
        ia, ib = np.nonzero(threshold_mask(coeffs, delta, "S"))
        if ia.size == 0:
            return None
        k = rng.integers(ia.size)
        w = coeffs.W[ia[k], ib[k]]
        v = np.real(coeffs.G[0, ia[k], ib[k]] / (2j * np.pi * w))
        return bool(abs(v - N) / N <= tol)

    results = _map(one, list(range(trials)), workers)
    empty = sum(r is None for r in results)
    k = sum(bool(r) for r in results)
    lo_ci, hi_ci = wilson_interval(k, trials)
    return ProbabilityEstimate(k / trials, lo_ci, hi_ci, k, trials, empty)


def run_prob_estimate(plan: ExperimentPlan) -> ExperimentTable:
    p = plan.params
    rows = []
    raw = {}
    for ci, cell in enumerate(plan.cells()):
        est = estimate_probability(float(cell["N"]), float(cell["s"]), float(cell["variance"]),
                                   tol=float(p["tol"]), trials=plan.trials, seed=plan.seed,
                                   fs=int(p["fs"]), delta=float(p["delta"]),
                                   candidates=int(p["candidates"]), cell=ci, workers=plan.workers)
        se = math.sqrt(est.p * (1 - est.p) / est.trials)
        rows.append(dict(cell, mean=est.p, std=se, trials=est.trials, seed=plan.seed,
                         ci_lo=est.lo, ci_hi=est.hi, empty=est.empty))
        raw[tuple(cell.values())] = est
    header = {f"param.{k}": v for k, v in sorted(p.items())}
    return ExperimentTable(plan.kind, list(plan.axes), rows, plan.seed, ["ci_lo", "ci_hi", "empty"],
                           header, raw)


# -- noise coefficient statistics ------------------------------------------------

@dataclass
class VarianceCheck:
    centers: np.ndarray
    positions: np.ndarray
    variance: np.ndarray
    expected: float
    correlation: float

    @property
    def ratio(self) -> np.ndarray:
        return self.variance / self.expected if self.expected > 0 else np.zeros_like(self.variance)


def coeff_variance_check(variance: float, trials: int = 500, points: int = 8, s: float = 0.75,
                         fs: int = 1024, seed: int = 0, cell: int = 0) -> VarianceCheck:
    """Empirical variance of noise-only coefficients ``W_e(a, b)`` over trials.

    Samples of variance ``sigma2`` on the unit interval discretise a white
    process of intensity ``sigma2 / fs``; with unit-norm packets the expected
    coefficient variance is that intensity. Also returns the largest
    correlation magnitude between the first two sampled centres, whose
    supports are disjoint.
    """
    spec = FrameSpec(n=1, s=s, length=fs, sample_rate=float(fs))
    grid = build_frame_grid(spec)
    rng = np.random.default_rng([int(seed), int(cell), 2 ** 31])
    # every other lattice centre: neighbours overlap, second neighbours do not
    pick = np.arange(1, grid.n_centers - 1, 2)
    pick = np.sort(rng.choice(pick, size=min(points, pick.size), replace=False))
    centers = grid.centers[pick]
    sub = FrameGrid(spec, centers, grid.radii[pick])
    positions = rng.integers(0, fs, size=pick.size)
    zero = Signal(np.zeros(fs, dtype=np.complex128), float(fs))
    samples = np.empty((trials, pick.size), dtype=np.complex128)
    pair = np.empty((trials, 2), dtype=np.complex128)
    for t in range(trials):
        noisy = add_noise(zero, NoiseSpec(variance=variance, seed=trial_seed(seed, cell, t)))
        W = forward_transform(noisy, sub).W
        samples[t] = W[np.arange(pick.size), positions]
        pair[t] = W[0:2, positions[0]]
    dev = samples - samples.mean(axis=0)
    var = np.mean(np.abs(dev) ** 2, axis=0)
    pd = pair - pair.mean(axis=0)
    den = math.sqrt(float(np.mean(np.abs(pd[:, 0]) ** 2) * np.mean(np.abs(pd[:, 1]) ** 2)))
    corr = float(abs(np.mean(pd[:, 0] * np.conj(pd[:, 1]))) / den) if den > 0 else 0.0
    return VarianceCheck(centers, positions / fs, var, variance / fs, corr)


def run_coeff_variance(plan: ExperimentPlan) -> ExperimentTable:
    p = plan.params
    rows, raw = [], {}
    for ci, cell in enumerate(plan.cells()):
        chk = coeff_variance_check(float(cell["variance"]), plan.trials, int(p["points"]), float(p["s"]),
                                   int(p["fs"]), plan.seed, ci)
        ratio = chk.ratio
        mean, std = (float(ratio.mean()), float(ratio.std(ddof=1))) if chk.expected > 0 else (0.0, 0.0)
        rows.append(dict(cell, mean=mean, std=std, trials=plan.trials, seed=plan.seed,
                         expected=chk.expected, ratio_min=float(ratio.min()), ratio_max=float(ratio.max()),
                         correlation=chk.correlation))
        raw[tuple(cell.values())] = chk
    header = {f"param.{k}": v for k, v in sorted(p.items())}
    return ExperimentTable(plan.kind, list(plan.axes), rows, plan.seed,
                           ["expected", "ratio_min", "ratio_max", "correlation"], header, raw)


# -- component presence test -------------------------------------------------------

def ridge_concentration(stack, truth, hit_bins: int = 2) -> float:
    """Fraction of positions whose stacked argmax lies within ``hit_bins`` of the truth."""
    hot = stack.v_grid.index(truth, 0)
    has = stack.T.sum(axis=0) > 0
    am = stack.T.argmax(axis=0)
    return float(np.mean(has & (hot >= 0) & (np.abs(am - hot) <= hit_bins)))


def argmax_spread(stack) -> float:
    """Circular spread ``1 - |mean exp(i theta)|`` of argmax bins mapped onto the circle."""
    has = stack.T.sum(axis=0) > 0
    if not has.any():
        return 1.0
    theta = 2 * np.pi * stack.T.argmax(axis=0)[has] / stack.T.shape[0]
    return float(1.0 - abs(np.mean(np.exp(1j * theta))))


def _condition(label: str):
    """``signal+<var>`` or ``noise[+<var>]`` -> (with_signal, variance)."""
    if label.startswith("signal+"):
        return True, float(label.split("+", 1)[1])
    if label == "noise":
        return False, 5.0
    if label.startswith("noise+"):
        return False, float(label.split("+", 1)[1])
    raise ParameterError(f"unknown component-test condition {label!r}")


def run_component_test(plan: ExperimentPlan) -> ExperimentTable:
    """Selective-max SST of the 2D warped wave under noise, and of noise alone.

    Concentration is measured on the ``x2 = 0`` stack against the warped
    wave's first wave-vector component.
    """
    p = plan.params
    fs = int(p["fs"])
    clean = gen_2d_warped(fs)
    zero = Signal(np.zeros((fs, fs), dtype=np.complex128), float(fs), {"generator": "zero"})
    spec = FrameSpec(n=2, s=float(p["s"]), red=int(p["red"]), band=tuple(p["band"]), length=fs,
                     sample_rate=float(fs))
    config = SqueezeConfig(delta=float(p["delta"]), dv=float(p["dv"]), mode=SELECTIVE_MAX, rows=(0,))
    cells = list(plan.cells())
    jobs = [(ci, t) for ci in range(len(cells)) for t in range(plan.trials)]

    def one(job):
        ci, t = job
        with_signal, var = _condition(cells[ci]["condition"])
        base = clean if with_signal else zero
        # the trial index alone seeds the noise, so conditions share draws
        noisy = add_noise(base, NoiseSpec(variance=var, seed=trial_seed(plan.seed, 0, t)))
        stack = stack_2d(redundant_sst(noisy, spec, config), 0)
        truth = warped_wave_vector(stack.b_lattice[0], 0.0)[:, 0]
        return ridge_concentration(stack, truth, int(p["hit_bins"])), argmax_spread(stack)

    values = _map(one, jobs, plan.workers)
    rows, raw = [], {}
    for ci, cell in enumerate(cells):
        vals = np.asarray(values[ci * plan.trials:(ci + 1) * plan.trials])
        mean, std = _summary(vals[:, 0])
        rows.append(dict(cell, mean=mean, std=std, trials=plan.trials, seed=plan.seed,
                         spread=float(vals[:, 1].mean())))
        raw[cell["condition"]] = vals[:, 0]
    header = {f"param.{k}": v for k, v in sorted(p.items())}
    return ExperimentTable(plan.kind, list(plan.axes), rows, plan.seed, ["spread"], header, raw)


RUNNERS = {
    EMD_VS_RED: run_emd_vs_red,
    EMD_VS_NOISE: run_emd_vs_noise,
    PROB_ESTIMATE: run_prob_estimate,
    COMPONENT_TEST: run_component_test,
    COEFF_VARIANCE: run_coeff_variance,
}


def run_plan(plan: ExperimentPlan) -> ExperimentTable:
    return RUNNERS[plan.kind](plan)

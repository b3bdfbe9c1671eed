"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times each kernel on inputs shaped like a 1024-sample chirp run and a
256 x 256 component-test run, then the full single-frame pipeline under
each backend (in a subprocess, since the backend is fixed at import).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from synsq import _kernels_py

try:
    from synsq import _kernels as compiled
except ImportError:
    compiled = None

PIPELINE = """
import timeit
from synsq import kernels
from synsq.signals import gen_single_chirp
from synsq.synchrosqueeze import SqueezeConfig, redundant_sst
from synsq.wavepacket import FrameSpec
sig = gen_single_chirp()
spec = FrameSpec(s=0.75, red=10)
t = min(timeit.repeat(lambda: redundant_sst(sig, spec, SqueezeConfig()), number=1, repeat={repeat}))
print(kernels.BACKEND, t)
"""


def cases(rng):
    # accumulate: ~3e5 reassigned coefficients into a (v, b) histogram
    n = 300_000
    size = 76 * 1024
    idx = rng.integers(-1, size, n).astype(np.int64)
    w = rng.random(n)
    # select_max: (centres, positions) power for one 2D frame row block
    power = np.ascontiguousarray(rng.random((420, 256 * 8)))
    mask = np.ascontiguousarray((rng.random(power.shape) < 0.3).astype(np.uint8))
    # emd: one distribution against its ridge
    T = np.ascontiguousarray(rng.random((76, 1024)) * (rng.random((76, 1024)) < 0.2))
    hot = rng.integers(0, 76, 1024).astype(np.int64)
    return {
        "accumulate": lambda m: m.accumulate(idx, w, size),
        "select_max": lambda m: m.select_max(power, mask),
        "emd_slices": lambda m: m.emd_slices(T, hot, 1.0),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<12} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for name, fn in cases(rng).items():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if compiled is None:
            print(f"{name:<12} {t_py:10.2f} {'n/a':>10} {'':>8}")
            continue
        t_c = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<12} {t_py:10.2f} {t_c:10.2f} {t_py / t_c:7.1f}x")

    print("\nchirp pipeline, s=0.75, red=10")
    for flag in ("1", "0"):
        env = dict(os.environ, SYNSQ_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", PIPELINE.format(repeat=args.repeat)], env=env,
                             capture_output=True, text=True, check=True)
        backend, t = out.stdout.split()
        print(f"  {backend:<8} {float(t) * 1e3:8.1f} ms")


if __name__ == "__main__":
    main()

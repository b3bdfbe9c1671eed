"""``synsq`` command line: synth | noise | sst | emd | experiment.

Exit codes: 0 success, 1 parameter error, 2 input/format error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .config import RunConfig, load_config, load_plan
from .errors import InputError, InvariantError, ParameterError, SynsqError
from .gridio import read_signal, read_tf, write_signal, write_tf
from .metrics import emd_score, ideal_distribution
from .signals import GENERATORS, NoiseSpec, add_noise, chirp_if, gen_plane_wave
from .statlab import run_plan
from .synchrosqueeze import FULL, SELECTIVE_MAX, SqueezeConfig, VGrid, redundant_sst
from .wavepacket import FrameSpec, make_mother_wavepacket, prepare_signal

SYNTH_DEFAULT_FS = {"chirp": 1024, "benchmark": 8192, "warped2d": 512, "plane": 8192}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ParameterError.exit_code, f"{self.prog}: error: {message}\n")


def _band(text):
    if text is None:
        return None
    try:
        lo, hi = (float(t) for t in str(text).split(":"))
    except ValueError:
        raise ParameterError(f"band must look like LO:HI, got {text!r}") from None
    return (lo, hi)


def _rows(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return tuple(int(t) for t in text)
    return tuple(int(t) for t in str(text).split(","))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="synsq", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"synsq {__version__}")
    p.add_argument("--config", help="TOML run configuration (flags override it)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sy = sub.add_parser("synth", help="generate a benchmark signal")
    sy.add_argument("generator", nargs="?", choices=sorted(list(GENERATORS) + ["plane"]))
    sy.add_argument("--fs", type=int)
    sy.add_argument("--freq", type=float, help="plane-wave frequency in Hz")
    sy.add_argument("--out", required=True)

    nz = sub.add_parser("noise", help="add seeded noise to a signal file")
    nz.add_argument("input")
    nz.add_argument("--kind", choices=["white_gaussian", "complex_gaussian", "alpha_stable"])
    nz.add_argument("--variance", type=float)
    nz.add_argument("--alpha", type=float)
    nz.add_argument("--dispersion", type=float)
    nz.add_argument("--loc", type=float)
    nz.add_argument("--linf", type=float, help="target L-infinity norm of alpha-stable noise")
    nz.add_argument("--seed", type=int)
    nz.add_argument("--out", required=True)

    ss = sub.add_parser("sst", help="synchrosqueezed distribution of a signal file")
    ss.add_argument("input")
    ss.add_argument("--s", type=float)
    ss.add_argument("--red", type=int)
    ss.add_argument("--delta", type=float)
    ss.add_argument("--threshold-mode", choices=["R", "S"])
    ss.add_argument("--band", help="LO:HI in Hz")
    ss.add_argument("--mode", choices=["full", "selective-max"])
    ss.add_argument("--vbin", type=float)
    ss.add_argument("--rows", help="comma-separated x2 sample indices (2D only; default 0)")
    ss.add_argument("--mother", choices=["bump", "spline"])
    ss.add_argument("--m", type=int)
    ss.add_argument("--d", type=float)
    ss.add_argument("--out", required=True)

    em = sub.add_parser("emd", help="EMD of a 1D distribution against an oracle ridge")
    em.add_argument("input")
    em.add_argument("--oracle", default="chirp", help="chirp | plane:<Hz>")
    em.add_argument("--out", help="CSV file to append a result row to")

    ex = sub.add_parser("experiment", help="run a Monte-Carlo plan")
    ex.add_argument("plan")
    ex.add_argument("--trials", type=int)
    ex.add_argument("--seed", type=int)
    ex.add_argument("--out")
    return p


def cmd_synth(args, cfg: RunConfig):
    cfg.override("synth", generator=args.generator, fs=args.fs, freq=args.freq)
    c = cfg["synth"]
    gen = c["generator"]
    fs = int(c["fs"] or SYNTH_DEFAULT_FS.get(gen, 1024))
    if gen == "plane":
        sig = gen_plane_wave(float(c["freq"]), fs)
    elif gen in GENERATORS:
        sig = GENERATORS[gen](fs)
    else:
        raise ParameterError(f"unknown generator {gen!r}")
    write_signal(args.out, sig)
    print(f"{gen}: {'x'.join(map(str, sig.samples.shape))} samples at {fs} Hz -> {args.out}")


def cmd_noise(args, cfg: RunConfig):
    cfg.override("noise", kind=args.kind, variance=args.variance, alpha=args.alpha,
                  dispersion=args.dispersion, loc=args.loc, linf=args.linf, seed=args.seed)
    c = cfg["noise"]
    spec = NoiseSpec(kind=c["kind"], variance=float(c["variance"]), alpha=float(c["alpha"]),
                     dispersion=float(c["dispersion"]), loc=float(c["loc"]),
                     target_linf=None if c["linf"] is None else float(c["linf"]), seed=int(c["seed"]))
    sig = read_signal(args.input)
    noisy = add_noise(sig, spec)
    write_signal(args.out, noisy)
    snr = noisy.provenance.get("snr_db")
    print(f"noise {spec.kind} seed={spec.seed} snr_db={snr} -> {args.out}")


def cmd_sst(args, cfg: RunConfig):
    mode = None if args.mode is None else args.mode.replace("-", "_")
    cfg.override("frame", s=args.s, red=args.red, band=_band(args.band), mother=args.mother, m=args.m, d=args.d)
    cfg.override("squeeze", delta=args.delta, threshold_mode=args.threshold_mode, mode=mode,
                 vbin=args.vbin, rows=_rows(args.rows))
    fr, sq = cfg["frame"], cfg["squeeze"]
    sig = prepare_signal(read_signal(args.input))
    n = sig.samples.ndim
    band = fr["band"]
    if band is not None and not isinstance(band, tuple):
        band = _band(band) if isinstance(band, str) else tuple(float(t) for t in band)
    mother = make_mother_wavepacket(fr["mother"], fr["m"], float(fr["d"]))
    spec = FrameSpec(n=n, s=float(fr["s"]), red=int(fr["red"]), band=band, mother=mother,
                     length=sig.samples.shape[0], sample_rate=sig.sample_rate)
    rows = _rows(sq["rows"]) if n == 2 else None
    if n == 2 and rows is None:
        rows = (0,)
    if sq["mode"] not in (FULL, SELECTIVE_MAX):
        raise ParameterError(f"unknown squeeze mode {sq['mode']!r}")
    config = SqueezeConfig(delta=float(sq["delta"]), threshold_mode=sq["threshold_mode"], mode=sq["mode"],
                           dv=float(sq["vbin"]), rows=rows)
    tf = redundant_sst(sig, spec, config)
    prov = {"input": os.path.basename(str(args.input)), "signal": sig.provenance,
            "frame": {"s": spec.s, "red": spec.red, "band": list(spec.effective_band()),
                      "mother": fr["mother"], "m": mother.m, "d": mother.d, "eps": mother.eps},
            "squeeze": {"delta": config.delta, "threshold_mode": config.threshold_mode,
                        "mode": config.mode, "vbin": config.dv, "rows": list(rows) if rows else None}}
    write_tf(args.out, tf, prov)
    print(f"dropped={tf.dropped} retained_energy={tf.retained_energy!r} -> {args.out}")


def _oracle(name: str):
    if name == "chirp":
        return chirp_if
    if name.startswith("plane:"):
        try:
            freq = float(name.split(":", 1)[1])
        except ValueError:
            raise ParameterError(f"bad plane oracle {name!r}") from None
        return lambda b: np.full(np.shape(b), freq)
    raise ParameterError(f"unknown oracle {name!r}; expected chirp or plane:<Hz>")


def cmd_emd(args, cfg: RunConfig):
    oracle = _oracle(args.oracle)
    tf = read_tf(args.input)
    if tf.T.ndim != 2:
        raise InputError("emd needs a 1D (v, x) distribution; stack 2D output first")
    ideal = ideal_distribution(oracle, tf.v_grid, tf.b_lattice[0])
    res = emd_score(tf, ideal)
    print(repr(res.value))
    if args.out:
        new = not os.path.exists(args.out)
        with open(args.out, "a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(["file", "oracle", "emd_hz", "used", "excluded"])
            w.writerow([os.path.basename(str(args.input)), args.oracle, repr(res.value), res.used, res.excluded])


def cmd_experiment(args, cfg: RunConfig):
    plan = load_plan(args.plan, cfg["experiment"])
    if args.trials is not None:
        plan = replace(plan, trials=args.trials)
    if args.seed is not None:
        plan = replace(plan, seed=args.seed)
    out = args.out or plan.output
    table = run_plan(plan)
    text = table.to_csv()
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
        print(f"{plan.kind}: {len(table.rows)} rows -> {out}")
    else:
        sys.stdout.write(text)


COMMANDS = {"synth": cmd_synth, "noise": cmd_noise, "sst": cmd_sst, "emd": cmd_emd,
            "experiment": cmd_experiment}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        COMMANDS[args.command](args, cfg)
    except SynsqError as exc:
        print(f"synsq: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"synsq: error: {exc}", file=sys.stderr)
        return InputError.exit_code
    except Exception as exc:  # noqa: BLE001
        print(f"synsq: internal error: {exc!r}", file=sys.stderr)
        return InvariantError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())

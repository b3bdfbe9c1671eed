"""Paired ``.json`` header + ``.bin`` payload grid files (see FORMS.md)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InputError
from .synchrosqueeze import TFDistribution, VGrid
from .wavepacket import Signal

FORMAT = "synsq-grid"
FORMAT_VERSION = 1
DTYPES = {"c128": np.dtype("<c16"), "f64": np.dtype("<f8")}


def _paths(path):
    p = Path(path)
    if p.suffix in (".json", ".bin"):
        p = p.with_suffix("")
    return p.with_name(p.name + ".json"), p.with_name(p.name + ".bin")


def write_grid(path, data, axes, provenance=None, **extra) -> tuple[Path, Path]:
    """Write ``data`` row-major little-endian with its JSON sidecar.

    ``axes`` holds one descriptor per array axis: ``{"name", "unit", "start",
    "step"}`` for regular axes or ``{"name", "unit", "values"}``.
    """
    data = np.asarray(data)
    code = "c128" if np.iscomplexobj(data) else "f64"
    if len(axes) != data.ndim:
        raise InputError(f"{len(axes)} axis descriptors for a {data.ndim}-axis array")
    header = {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "dtype": code,
        "shape": list(data.shape),
        "order": "C",
        "endianness": "little",
        "axes": axes,
        "provenance": provenance or {},
    }
    header.update(extra)
    jpath, bpath = _paths(path)
    jpath.parent.mkdir(parents=True, exist_ok=True)
    payload = np.ascontiguousarray(data, dtype=DTYPES[code])
    with open(bpath, "wb") as fh:
        fh.write(payload.tobytes(order="C"))
    with open(jpath, "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return jpath, bpath


def read_grid(path):
    """Return ``(array, header)``; raises InputError on any format problem."""
    jpath, bpath = _paths(path)
    try:
        with open(jpath) as fh:
            header = json.load(fh)
        raw = bpath.read_bytes()
    except FileNotFoundError as exc:
        raise InputError(f"missing grid file: {exc.filename}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{jpath}: invalid JSON header ({exc})") from exc
    if header.get("format") != FORMAT:
        raise InputError(f"{jpath}: not a {FORMAT} header")
    if header.get("format_version") != FORMAT_VERSION:
        raise InputError(f"{jpath}: unsupported format version {header.get('format_version')}")
    code = header.get("dtype")
    if code not in DTYPES:
        raise InputError(f"{jpath}: unknown dtype {code!r}")
    shape = tuple(int(k) for k in header.get("shape", ()))
    dtype = DTYPES[code]
    expected = int(np.prod(shape)) * dtype.itemsize
    if len(raw) != expected:
        raise InputError(f"{bpath}: payload has {len(raw)} bytes, header implies {expected}")
    data = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
    return data, header


def _regular(name, unit, start, step):
    return {"name": name, "unit": unit, "start": float(start), "step": float(step)}


def axis_values(desc, size):
    if "values" in desc:
        return np.asarray(desc["values"], dtype=np.float64)
    return desc["start"] + desc["step"] * np.arange(size)


def write_signal(path, signal: Signal, **extra):
    fs = float(signal.sample_rate)
    names = ["x"] if signal.n == 1 else ["x1", "x2"]
    axes = [_regular(n, "s", 0.0, 1.0 / fs) for n in names]
    return write_grid(path, signal.samples, axes, signal.provenance, sample_rate=fs,
                      kind="signal", seed=(signal.provenance.get("noise") or {}).get("seed"), **extra)


def read_signal(path) -> Signal:
    data, header = read_grid(path)
    if header.get("kind") != "signal":
        raise InputError(f"{path}: grid is not a signal (kind={header.get('kind')!r})")
    return Signal(data, float(header["sample_rate"]), header.get("provenance", {}))


def write_tf(path, tf: TFDistribution, provenance=None, **extra):
    vg = tf.v_grid
    names = ["v"] if vg.ndim == 1 else ["v1", "v2"]
    axes = [_regular(names[k], "Hz", vg.v_min[k], vg.dv[k]) for k in range(vg.ndim)]
    bnames = ["x"] if len(tf.b_lattice) == 1 else ["x1", "x2"]
    for name, b in zip(bnames, tf.b_lattice):
        b = np.asarray(b, dtype=np.float64)
        axes.append({"name": name, "unit": "s", "values": b.tolist()})
    return write_grid(path, tf.T, axes, provenance, kind="distribution", meta=tf.meta,
                      dropped=tf.dropped, retained_energy=tf.retained_energy, **extra)


def read_tf(path) -> TFDistribution:
    data, header = read_grid(path)
    if header.get("kind") != "distribution":
        raise InputError(f"{path}: grid is not a distribution (kind={header.get('kind')!r})")
    axes = header["axes"]
    nv = data.ndim // 2
    vaxes = axes[:nv]
    vg = VGrid(tuple(a["start"] for a in vaxes),
               tuple(a["start"] + a["step"] * (data.shape[k] - 1) for k, a in enumerate(vaxes)),
               tuple(a["step"] for a in vaxes))
    b = tuple(axis_values(a, data.shape[nv + k]) for k, a in enumerate(axes[nv:]))
    return TFDistribution(data, vg, b, header.get("meta", {}), int(header.get("dropped", 0)),
                          float(header.get("retained_energy", 0.0)))

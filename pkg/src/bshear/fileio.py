"""File formats: binary PGM images with raw float64 sidecars, the shearlet
filter cache, selection dumps, and experiment report CSVs.

PGM is used for portability, the .f64 sidecar for bit-exact values; every
parser reports the byte offset of the first malformed content.
"""

from __future__ import annotations

import io
import json
import os
import tempfile

import numpy as np

from .errors import ConfigurationError
from .geometry import DigitalDomain, build_domain

CACHE_MAGIC = b"BSHFILT1\n"


class FormatError(ConfigurationError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


# ---------------------------------------------------------------------------
# PGM + raw float64 sidecar
# ---------------------------------------------------------------------------

def write_pgm(path: str, g: np.ndarray, bits: int = 16, sidecar: bool = True):
    """Write g as binary PGM (rescaled to the integer range) and, by default,
    the exact float64 values to path + '.f64' (little-endian, row-major)."""
    if bits not in (8, 16):
        raise ConfigurationError("PGM depth must be 8 or 16 bits")
    g = np.asarray(g, dtype=float)
    maxval = (1 << bits) - 1
    lo, hi = float(g.min()), float(g.max())
    scale = (maxval / (hi - lo)) if hi > lo else 0.0
    q = np.round((g - lo) * scale).astype(">u2" if bits == 16 else "u1")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{g.shape[1]} {g.shape[0]}\n{maxval}\n".encode())
        fh.write(q.tobytes())
    if sidecar:
        write_raw(path + ".f64", g)


def write_raw(path: str, g: np.ndarray):
    np.asarray(g, dtype="<f8").tofile(path)


def read_raw(path: str, shape) -> np.ndarray:
    data = np.fromfile(path, dtype="<f8")
    expected = int(np.prod(shape))
    if data.size != expected:
        raise FormatError(
            f"raw float64 file {path} holds {data.size} values, expected {expected}",
            offset=data.size * 8,
        )
    return data.reshape(shape)


def read_pgm(path: str) -> np.ndarray:
    """Read a binary (P5) PGM; prefers the .f64 sidecar when present."""
    if os.path.exists(path + ".f64"):
        with open(path, "rb") as fh:
            raw = fh.read()
        _, shape, _, _ = _parse_pgm_header(raw)
        return read_raw(path + ".f64", shape)
    with open(path, "rb") as fh:
        raw = fh.read()
    off, shape, maxval, raw = _parse_pgm_header(raw)
    dtype = ">u2" if maxval > 255 else "u1"
    count = shape[0] * shape[1]
    body = np.frombuffer(raw, dtype=dtype, offset=off, count=-1)
    if body.size < count:
        raise FormatError(
            f"PGM pixel data truncated: {body.size} of {count} samples",
            offset=off + body.size * np.dtype(dtype).itemsize,
        )
    return body[:count].astype(float).reshape(shape) / maxval


def _parse_pgm_header(raw: bytes):
    if not raw.startswith(b"P5"):
        raise FormatError("not a binary PGM (missing P5 magic)", offset=0)
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("PGM header ended early", offset=start)
        try:
            fields.append(int(raw[start:pos]))
        except ValueError:
            raise FormatError(
                f"bad PGM header token {raw[start:pos]!r}", offset=start
            ) from None
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval not in (255, 65535):
        raise FormatError(f"unsupported PGM maxval {maxval}", offset=2)
    return pos, (h, w), maxval, raw


# ---------------------------------------------------------------------------
# shearlet filter cache
# ---------------------------------------------------------------------------

def cache_key(n: int, scales: int, ladder, generator: str) -> str:
    lad = "-".join(str(v) for v in ladder)
    return f"filters_n{n}_s{scales}_d{lad}_{generator}.bsh"


def write_filter_cache(path: str, system) -> None:
    """Header (JSON line: grid, scales, ladder, generator, eps_supp, channel
    metadata) followed by the little-endian complex64 filter stack."""
    header = {
        "n": system.domain.n,
        "scales": system.n_scales,
        "ladder": list(system.shears_per_scale),
        "generator": system.generator,
        "eps_supp": system.eps_supp,
        "q_sh": system.q_sh,
        "channels": [
            {"j": ch.j, "k": ch.k, "iota": ch.iota, "octave": ch.octave,
             "stride": list(ch.stride), "box_r": list(ch.box_r),
             "radius": ch.radius}
            for ch in system.channels
        ],
    }
    body = np.stack([ch.filt for ch in system.channels]).astype("<c8") \
        if system.channels else np.zeros((0,), dtype="<c8")
    tmp_fd, tmp_path = tempfile.mkstemp(dir=os.path.dirname(path) or ".")
    try:
        with os.fdopen(tmp_fd, "wb") as fh:
            fh.write(CACHE_MAGIC)
            fh.write((json.dumps(header) + "\n").encode())
            fh.write(body.tobytes())
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def read_filter_cache(path: str):
    """Rebuild a ShearletSystem from a cache file."""
    from .shearlet import Channel, ShearletSystem

    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(CACHE_MAGIC):
        raise FormatError("bad filter-cache magic", offset=0)
    nl = raw.find(b"\n", len(CACHE_MAGIC))
    if nl < 0:
        raise FormatError("filter-cache header line missing", offset=len(CACHE_MAGIC))
    try:
        header = json.loads(raw[len(CACHE_MAGIC) : nl])
    except json.JSONDecodeError as exc:
        raise FormatError(f"corrupt filter-cache header: {exc}",
                          offset=len(CACHE_MAGIC)) from None
    n = header["n"]
    chans_meta = header["channels"]
    usable = (len(raw) - nl - 1) // 8
    body = np.frombuffer(raw, dtype="<c8", offset=nl + 1, count=usable)
    expected = len(chans_meta) * n * n
    if body.size != expected:
        raise FormatError(
            f"filter-cache body holds {body.size} values, expected {expected}",
            offset=nl + 1 + body.size * 8,
        )
    domain = build_domain(n)
    system = ShearletSystem(domain, 0)  # empty shell, then hydrate
    system.n_scales = header["scales"]
    system.shears_per_scale = list(header["ladder"])
    system.generator = header["generator"]
    system.eps_supp = header["eps_supp"]
    system.q_sh = header["q_sh"]
    filters = body.reshape(len(chans_meta), n, n).real.astype(float)
    system.channels = [
        Channel(j=m["j"], k=m["k"], iota=m["iota"], octave=m["octave"],
                stride=tuple(m["stride"]), filt=filters[i],
                box_r=tuple(m["box_r"]), radius=m["radius"])
        for i, m in enumerate(chans_meta)
    ]
    return system


# ---------------------------------------------------------------------------
# CSV writers
# ---------------------------------------------------------------------------

def write_selection_csv(path: str, bss) -> None:
    """Columns: kind (w|s), j, k (blank for wavelets), m1, m2, upsilon/iota."""
    lines = ["kind,j,k,m1,m2,orient"]
    for idx in bss.theta_sel:
        lines.append(f"w,{idx.j},,{idx.m[0]:.10g},{idx.m[1]:.10g},{idx.upsilon}")
    for idx in bss.lambda0_sel:
        lines.append(f"s,{idx.j},{idx.k},{idx.m[0]},{idx.m[1]},{idx.iota}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_report_csv(path: str, report) -> None:
    """Self-describing CSV: parameter echo as # comments, then named rows.

    Volatile metadata (wall time, arrays) stays out so identical runs give
    identical files.
    """
    lines = [f"# kind: {report.kind}"]
    for key in sorted(report.params):
        lines.append(f"# {key}: {json.dumps(report.params[key])}")
    for key in sorted(report.metadata):
        if key == "wall_time" or isinstance(report.metadata[key], np.ndarray):
            continue
        lines.append(f"# {key}: {json.dumps(report.metadata[key])}")
    if report.rows:
        cols = list(report.rows[0].keys())
        lines.append(",".join(cols))
        for row in report.rows:
            lines.append(",".join(_csv_cell(row.get(c)) for c in cols))
    _atomic_write(path, "\n".join(lines) + "\n")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v).replace(",", ";")


def _atomic_write(path: str, text: str) -> None:
    tmp_fd, tmp_path = tempfile.mkstemp(dir=os.path.dirname(path) or ".")
    try:
        with os.fdopen(tmp_fd, "w") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise

"""Time-series CSV and binary field checkpoints."""
from __future__ import annotations

import hashlib
import io as _io
import json
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CorruptionError, UnsupportedVersionError
from .grid import SpatialGrid
from .model import ComplexField

FLOAT_FMT = "%.17g"


def timeseries_header(dim: int) -> list:
    def vec(name):
        return [f"{name}_{i + 1}" for i in range(dim)]

    return (["t"] + vec("q_eps") + vec("p_eps") + ["m_eps", "E_total", "J_internal",
            "G_dynamical", "C_charge"] + vec("P_total") + vec("K_eps") + vec("H_eps")
            + vec("F_eps") + vec("qhat") + vec("q_classical") + vec("p_classical"))


def timeseries_rows(samples: Sequence, classical=None) -> np.ndarray:
    """Rows in header order; the particle columns are NaN without ``classical``."""
    rows = []
    for i, s in enumerate(samples):
        dim = len(s.q)
        if classical is not None:
            cq, cp = list(classical.q[i]), list(classical.p[i])
        else:
            cq = cp = [float("nan")] * dim
        rows.append([s.t, *s.q, *s.p, s.m_eps, s.E_total, s.J_internal, s.G_dynamical,
                     s.C_charge, *s.P_total, *s.K, *s.H, *s.F, *s.qhat, *cq, *cp])
    return np.array(rows, dtype=float)


def write_timeseries(samples: Sequence, path, dim: int, classical=None) -> Path:
    path = Path(path)
    header = ",".join(timeseries_header(dim))
    rows = timeseries_rows(samples, classical)
    buf = _io.StringIO()
    buf.write(header + "\n")
    for r in rows:
        buf.write(",".join(FLOAT_FMT % v for v in r) + "\n")
    try:
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write time series: {exc.strerror}", str(path)) from exc
    return path


def read_timeseries(path) -> tuple:
    """(header list, 2D array); a header-only file gives shape (0, ncols)."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    data = [[float(v) for v in ln.split(",")] for ln in lines[1:] if ln]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


def column(header, data, name) -> np.ndarray:
    """Scalar column ``name`` or the stacked vector columns name_1..name_N."""
    if name in header:
        return data[:, header.index(name)]
    idx = [i for i, h in enumerate(header) if h.rsplit("_", 1)[0] == name and h.rsplit("_", 1)[1].isdigit()]
    if not idx:
        raise KeyError(name)
    return data[:, idx]


# checkpoints ----------------------------------------------------------------
#
# layout (little endian):
#   magic  b"SLCKPT\0\0"                     8 bytes
#   version u16, dim u8, pad u8, id_len u32
#   run id (utf-8, id_len bytes)
#   t f64, then per axis: L f64, n u32
#   payload: complex samples as f64 pairs, row-major
#   checksum: blake2b-64 of every preceding byte

MAGIC = b"SLCKPT\0\0"
VERSION = 1
_HEAD = struct.Struct("<HBBI")


def _encode(f: ComplexField, run_id: str) -> bytes:
    rid = run_id.encode("utf-8")
    g = f.grid
    parts = [MAGIC, _HEAD.pack(VERSION, g.dim, 0, len(rid)), rid, struct.pack("<d", f.t)]
    for L, n in zip(g.L, g.n):
        parts.append(struct.pack("<dI", L, n))
    parts.append(np.ascontiguousarray(f.values, dtype="<c16").tobytes())
    body = b"".join(parts)
    return body + hashlib.blake2b(body, digest_size=8).digest()


def save_checkpoint(f: ComplexField, path, run_id: str = "") -> Path:
    path = Path(path)
    path.write_bytes(_encode(f, run_id))
    return path


def load_checkpoint(path) -> tuple:
    """Returns (ComplexField, run_id)."""
    blob = Path(path).read_bytes()
    if len(blob) < len(MAGIC) + _HEAD.size or blob[: len(MAGIC)] != MAGIC:
        raise CorruptionError(f"{path}: not a checkpoint (bad magic or truncated header)")
    version, dim, _, nid = _HEAD.unpack_from(blob, len(MAGIC))
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: checkpoint version {version}, this build reads {VERSION}")
    if len(blob) < 8:
        raise CorruptionError(f"{path}: truncated")
    body, digest = blob[:-8], blob[-8:]
    if hashlib.blake2b(body, digest_size=8).digest() != digest:
        raise CorruptionError(f"{path}: checksum mismatch")
    try:
        off = len(MAGIC) + _HEAD.size
        rid = body[off:off + nid].decode("utf-8")
        off += nid
        (t,) = struct.unpack_from("<d", body, off)
        off += 8
        Ls, ns = [], []
        for _ in range(dim):
            L, n = struct.unpack_from("<dI", body, off)
            off += 12
            Ls.append(L)
            ns.append(n)
        grid = SpatialGrid(dim, tuple(Ls), tuple(ns))
        count = int(np.prod(ns))
        if len(body) - off != 16 * count:
            raise CorruptionError(f"{path}: payload length does not match the grid")
        vals = np.frombuffer(body, dtype="<c16", count=count, offset=off).reshape(grid.shape)
    except (struct.error, UnicodeDecodeError, ValueError) as exc:
        raise CorruptionError(f"{path}: malformed header ({exc})") from exc
    return ComplexField(grid, vals.astype(complex), t), rid


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, tuple):
        return list(v)
    raise TypeError(f"cannot serialise {type(v).__name__}")

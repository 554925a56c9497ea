"""CSV reports, interface-mode files and the binary field dump."""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .config import ConfigError
from .grid import GridSpec
from .resolvent import SIDES, InterfaceData, TwoPhaseField

MAGIC = b"S2PF"
VERSION = 1
_HEAD = struct.Struct("<4sHHI")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12e}"
    return str(v)


def write_csv(path, columns, rows, config_hash: str) -> None:
    """Comment line with the config hash, a header, then rows.  No timestamps."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash: {config_hash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def read_csv(path):
    """Return ``(config_hash, columns, rows)`` with rows as lists of strings."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("# config_hash:"):
            raise ValueError(f"{path}: missing config hash line")
        rd = csv.reader(fh)
        cols = next(rd)
        return first.split(":", 1)[1].strip(), cols, list(rd)


def mode_columns(n: int) -> list:
    return [f"k{i}" for i in range(1, n)] + ["field", "re", "im"]


def write_modes(path, data: InterfaceData, config_hash: str) -> None:
    grid = data.grid
    idx, k, _ = grid.mode_table()
    rows = []
    names = [f"g{j + 1}" for j in range(grid.n)] + [f"h{j + 1}" for j in range(grid.n)] + ["d"]
    for i, ki in zip(idx, k):
        ti = tuple(i)
        vals = [data.g_hat[(j,) + ti] for j in range(grid.n)] + [data.h_hat[(j,) + ti] for j in range(grid.n)]
        vals.append(data.d_hat[ti])
        for name, v in zip(names, vals):
            if v != 0:
                rows.append([int(c) for c in ki] + [name, v.real, v.imag])
    write_csv(path, mode_columns(grid.n), rows, config_hash)


def read_modes(path, grid: GridSpec) -> InterfaceData:
    """Interface data from a mode CSV; every malformed entry is a :class:`ConfigError`."""
    try:
        _, cols, rows = read_csv(path)
    except (OSError, ValueError, StopIteration) as exc:
        raise ConfigError(f"cannot read mode file {path}: {exc}") from exc
    if cols != mode_columns(grid.n):
        raise ConfigError(f"{path}: columns {cols} do not match a grid of dimension {grid.n}")
    out = InterfaceData.zeros(grid)
    for ln, r in enumerate(rows, start=3):
        try:
            k = tuple(int(c) for c in r[: grid.n - 1])
            val = complex(float(r[-2]), float(r[-1]))
            out.set_entry(r[grid.n - 1], grid.index_of(k), val)
        except (IndexError, KeyError, ValueError) as exc:
            raise ConfigError(f"{path}:{ln}: {exc}") from exc
    return out


def modes_from_config(entries, grid: GridSpec) -> InterfaceData:
    """``[{'k': [..], 'g1': c, ...}]`` with ``c`` a number or ``[re, im]``."""
    from .config import complex_entry

    out = InterfaceData.zeros(grid)
    for i, e in enumerate(entries):
        k = e["k"] if isinstance(e["k"], list) else [e["k"]]
        try:
            idx = grid.index_of(tuple(int(c) for c in k))
            for name, v in e.items():
                if name != "k":
                    out.set_entry(name, idx, complex_entry(v, f"data.modes[{i}].{name}"))
        except (IndexError, KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"data.modes[{i}]: {exc}") from exc
    return out


# --------------------------------------------------------------------------
# binary field dump
# --------------------------------------------------------------------------


@dataclass
class FieldDump:
    n: int
    N: tuple
    Nv: int
    lam: complex
    X: float
    beta: float
    L: tuple
    values: np.ndarray  # (2 sides, n + 1 components, *N, Nv + 1), upper side first


def write_field(path, fld: TwoPhaseField) -> None:
    """Little-endian dump of the physical velocity and pressure on both phases.

    Layout: ``magic 'S2PF'``, ``uint16 version``, ``uint16 n``, ``uint32``
    count of doubles; ``n`` ``uint32`` dims ``(N_1, ..., N_{n-1}, Nv + 1)``;
    the doubles ``(lam.re, lam.im, X, beta, L_1, ..., L_{n-1})``; then the
    complex128 payload of shape ``(2, n + 1, N..., Nv + 1)`` in row-major
    order with the upper phase first and the pressure last.
    """
    g = fld.grid
    parts = []
    for s in SIDES:
        u, th = fld.physical(s)
        parts.append(np.concatenate([u, th[None]]))
    payload = np.ascontiguousarray(np.stack(parts), dtype="<c16")
    doubles = [fld.lam.real, fld.lam.imag, g.X, g.beta, *g.L]
    dims = list(g.N) + [g.Nv + 1]
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, g.n, len(doubles)))
        fh.write(struct.pack(f"<{len(dims)}I", *dims))
        fh.write(struct.pack(f"<{len(doubles)}d", *doubles))
        fh.write(payload.tobytes())


def read_field(path) -> FieldDump:
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _HEAD.size:
        raise ValueError("truncated field dump")
    magic, ver, n, nd = _HEAD.unpack_from(buf, 0)
    if magic != MAGIC or ver != VERSION:
        raise ValueError(f"not a field dump (magic {magic!r}, version {ver})")
    off = _HEAD.size
    dims = struct.unpack_from(f"<{n}I", buf, off)
    off += 4 * n
    doubles = struct.unpack_from(f"<{nd}d", buf, off)
    off += 8 * nd
    shape = (2, n + 1) + tuple(dims)
    count = int(np.prod(shape))
    if len(buf) - off != 16 * count:
        raise ValueError("field dump payload size does not match its header")
    vals = np.frombuffer(buf, dtype="<c16", count=count, offset=off).reshape(shape)
    return FieldDump(n, tuple(dims[:-1]), dims[-1] - 1, complex(doubles[0], doubles[1]), doubles[2],
                     doubles[3], tuple(doubles[4:]), vals)

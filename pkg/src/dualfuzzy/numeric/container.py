"""Binary tensor container used for checkpoints and mesh files.

Layout (all integers little-endian)::

    b"DFZC"                      magic
    uint32                       format version
    uint64                       header length in bytes
    header                       UTF-8 JSON: {"version", "meta", "tensors": [...]}
    payloads                     raw little-endian arrays, row-major, in manifest order

Each manifest entry is ``{"name", "shape", "dtype", "offset", "nbytes"}`` with
``offset`` relative to the start of the payload section.  ``dtype`` is ``"f64"``
or ``"i64"``.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"DFZC"
VERSION = 1
_DTYPES = {"f64": np.dtype("<f8"), "i64": np.dtype("<i8")}


class ContainerError(ValueError):
    pass


def _tag(arr: np.ndarray) -> str:
    if np.issubdtype(arr.dtype, np.floating):
        return "f64"
    if np.issubdtype(arr.dtype, np.integer):
        return "i64"
    raise ContainerError(f"unsupported dtype {arr.dtype}")


def dumps(tensors: dict, meta: dict | None = None) -> bytes:
    entries = []
    payloads = []
    offset = 0
    for name, arr in tensors.items():
        arr = np.asarray(arr)
        tag = _tag(arr)
        raw = np.ascontiguousarray(arr, dtype=_DTYPES[tag]).tobytes()
        entries.append({"name": name, "shape": list(arr.shape), "dtype": tag,
                        "offset": offset, "nbytes": len(raw)})
        payloads.append(raw)
        offset += len(raw)
    header = json.dumps({"version": VERSION, "meta": meta or {}, "tensors": entries},
                        sort_keys=True, separators=(",", ":")).encode("utf-8")
    return b"".join([MAGIC, struct.pack("<IQ", VERSION, len(header)), header, *payloads])


def loads(blob: bytes) -> tuple[dict, dict]:
    if blob[:4] != MAGIC:
        raise ContainerError("not a tensor container (bad magic)")
    version, hlen = struct.unpack_from("<IQ", blob, 4)
    if version != VERSION:
        raise ContainerError(f"unsupported container version {version}")
    start = 16
    header = json.loads(blob[start:start + hlen].decode("utf-8"))
    base = start + hlen
    tensors = {}
    for e in header["tensors"]:
        dt = _DTYPES.get(e["dtype"])
        if dt is None:
            raise ContainerError(f"unknown dtype tag {e['dtype']!r}")
        lo = base + e["offset"]
        raw = blob[lo:lo + e["nbytes"]]
        if len(raw) != e["nbytes"]:
            raise ContainerError(f"truncated payload for {e['name']!r}")
        arr = np.frombuffer(raw, dtype=dt).reshape(e["shape"])
        tensors[e["name"]] = arr.astype(dt.newbyteorder("="), copy=True)
    return tensors, header["meta"]


def save(path, tensors: dict, meta: dict | None = None) -> None:
    Path(path).write_bytes(dumps(tensors, meta))


def load(path) -> tuple[dict, dict]:
    return loads(Path(path).read_bytes())

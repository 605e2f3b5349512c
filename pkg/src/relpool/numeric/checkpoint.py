"""Binary checkpoint format for named parameter maps.

Layout (all integers little-endian)::

    magic       8 bytes   b"RELPOOL\\x01"
    header_len  uint32    length in bytes of the JSON header
    header      UTF-8 JSON, keys sorted:
                  {"precision": "float32" | "float64",
                   "metadata": {...},              # free-form, JSON-able
                   "tensors": [{"name", "shape", "nbytes"}, ...]}
    payload     for each tensor, in header order: the row-major values as
                little-endian IEEE floats of the tagged precision

No timestamps or host data are written, so equal parameters and metadata
always produce byte-identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"RELPOOL\x01"
_FORMATS = {"float32": "<f4", "float64": "<f8"}


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, params: dict[str, np.ndarray], precision: str = "float32",
                    metadata: dict | None = None) -> None:
    if precision not in _FORMATS:
        raise CheckpointError(f"unknown precision {precision!r}")
    fmt = _FORMATS[precision]
    blobs = []
    entries = []
    for name, value in params.items():
        arr = np.ascontiguousarray(np.asarray(value), dtype=fmt)
        blob = arr.tobytes(order="C")
        entries.append({"name": name, "shape": list(arr.shape), "nbytes": len(blob)})
        blobs.append(blob)
    header = json.dumps({"precision": precision, "metadata": metadata or {}, "tensors": entries},
                        sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(Path(path), "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], str, dict]:
    """Return ``(params, precision, metadata)``; arrays come back in native byte order."""
    raw = Path(path).read_bytes()
    if raw[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: not a relpool checkpoint (bad magic)")
    (header_len,) = struct.unpack_from("<I", raw, len(MAGIC))
    start = len(MAGIC) + 4
    try:
        header = json.loads(raw[start:start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt header ({exc})") from None
    precision = header["precision"]
    fmt = _FORMATS.get(precision)
    if fmt is None:
        raise CheckpointError(f"{path}: unknown precision tag {precision!r}")
    offset = start + header_len
    params = {}
    for entry in header["tensors"]:
        nbytes = entry["nbytes"]
        chunk = raw[offset:offset + nbytes]
        if len(chunk) != nbytes:
            raise CheckpointError(f"{path}: truncated payload for {entry['name']}")
        arr = np.frombuffer(chunk, dtype=fmt).reshape(entry["shape"])
        params[entry["name"]] = arr.astype(np.dtype(fmt).newbyteorder("="))
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - offset} trailing bytes")
    return params, precision, header["metadata"]

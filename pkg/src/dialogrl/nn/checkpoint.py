"""Parameter checkpoints.

Layout::

    b"DFCKPT1\\n"
    uint64 little-endian length of the JSON manifest
    JSON manifest: {"params": [{"id": ..., "shape": [...]}, ...], "meta": {...}}
    float64 little-endian values of every parameter, in manifest order

Parameters are written sorted by id so that identical contents always give
identical bytes.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Iterable

import numpy as np

from .tensor import Parameter

MAGIC = b"DFCKPT1\n"


class CheckpointError(ValueError):
    pass


def to_bytes(params: Iterable[Parameter], meta: dict | None = None) -> bytes:
    params = sorted(params, key=lambda p: p.id)
    ids = [p.id for p in params]
    if len(set(ids)) != len(ids):
        raise CheckpointError("duplicate parameter ids")
    manifest = {"params": [{"id": p.id, "shape": list(p.shape)} for p in params],
                "meta": meta or {}}
    head = json.dumps(manifest, sort_keys=True).encode()
    body = b"".join(np.ascontiguousarray(p.value, dtype="<f8").tobytes() for p in params)
    return MAGIC + struct.pack("<Q", len(head)) + head + body


def from_bytes(blob: bytes) -> tuple[dict[str, np.ndarray], dict]:
    if not blob.startswith(MAGIC):
        raise CheckpointError("missing DFCKPT1 header")
    pos = len(MAGIC)
    (n,) = struct.unpack_from("<Q", blob, pos)
    pos += 8
    manifest = json.loads(blob[pos:pos + n])
    pos += n
    arrays = {}
    for entry in manifest["params"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=pos).reshape(shape)
        arrays[entry["id"]] = arr.astype(np.float64)
        pos += 8 * count
    if pos != len(blob):
        raise CheckpointError("trailing bytes after parameter data")
    return arrays, manifest.get("meta", {})


def save(path, params: Iterable[Parameter], meta: dict | None = None) -> None:
    Path(path).write_bytes(to_bytes(params, meta))


def load_into(path_or_bytes, params: Iterable[Parameter], strict: bool = True) -> dict:
    blob = path_or_bytes if isinstance(path_or_bytes, bytes) else Path(path_or_bytes).read_bytes()
    arrays, meta = from_bytes(blob)
    params = list(params)
    for p in params:
        if p.id not in arrays:
            if strict:
                raise CheckpointError(f"checkpoint has no parameter {p.id!r}")
            continue
        a = arrays[p.id]
        if a.shape != p.shape:
            raise CheckpointError(f"{p.id}: checkpoint shape {a.shape} != parameter shape {p.shape}")
        p.value[...] = a
    if strict:
        extra = set(arrays) - {p.id for p in params}
        if extra:
            raise CheckpointError(f"unexpected parameters in checkpoint: {sorted(extra)[:5]}")
    return meta

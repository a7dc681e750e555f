"""
Self-describing binary container for named float64 tensors.

Layout: magic ``GAREC`` | uint16 format version | uint32 header length |
UTF-8 JSON header | tensors as little-endian float64, row-major, in header order.
The header carries ``kind``, the tensor names and shapes, and any caller metadata.
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from garec.exceptions import CheckpointError

MAGIC = b"GAREC"
FORMAT_VERSION = 1

_PREFIX = struct.Struct("<5sHI")
_DTYPE = np.dtype("<f8")


def write_container(path: str, kind: str, tensors: dict[str, np.ndarray], meta: dict | None = None) -> str:
    header = {
        **(meta or {}),
        "kind": kind,
        "tensors": [{"name": name, "shape": list(np.shape(t))} for name, t in tensors.items()],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)))
        handle.write(header_bytes)
        for tensor in tensors.values():
            handle.write(np.ascontiguousarray(tensor, dtype=_DTYPE).tobytes(order="C"))
    return path


def read_container(path: str, kind: str) -> tuple[dict, dict[str, np.ndarray]]:
    """Return (header, tensors) of a container written by ``write_container``.

    Raises:
        CheckpointError on foreign magic, unknown version, wrong kind or truncation
    """
    if not os.path.exists(path):
        raise CheckpointError(f"Checkpoint not found: {path}")
    with open(path, "rb") as handle:
        blob = handle.read()
    if len(blob) < _PREFIX.size:
        raise CheckpointError(f"{path}: truncated checkpoint (no header)")
    magic, version, header_len = _PREFIX.unpack_from(blob, 0)
    if magic != MAGIC:
        raise CheckpointError(
            f"{path}: not a GARec checkpoint (magic {magic!r}, expected {MAGIC!r})",
            expected=MAGIC,
            found=magic,
        )
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: checkpoint format version {version}, this build reads version {FORMAT_VERSION}",
            expected=FORMAT_VERSION,
            found=version,
        )
    offset = _PREFIX.size
    if len(blob) < offset + header_len:
        raise CheckpointError(f"{path}: truncated checkpoint header")
    try:
        header = json.loads(blob[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: corrupt checkpoint header ({e})")
    if header.get("kind") != kind:
        raise CheckpointError(
            f"{path}: checkpoint holds '{header.get('kind')}', expected '{kind}'",
            expected=kind,
            found=header.get("kind"),
        )
    offset += header_len

    tensors: dict[str, np.ndarray] = {}
    for spec in header["tensors"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        size = count * _DTYPE.itemsize
        if len(blob) < offset + size:
            raise CheckpointError(f"{path}: truncated checkpoint (tensor '{spec['name']}' incomplete)")
        flat = np.frombuffer(blob, dtype=_DTYPE, count=count, offset=offset)
        tensors[spec["name"]] = flat.reshape(shape).astype(np.float64)
        offset += size
    if offset != len(blob):
        raise CheckpointError(f"{path}: {len(blob) - offset} trailing byte(s) after the last tensor")
    return header, tensors

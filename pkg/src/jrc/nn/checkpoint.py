"""The "JRNN" parameter container.

Layout (little-endian)::

    b"JRNN" | version u8 | config_len u32 | config JSON (utf-8)
    | count u32 | count x (name_len u16, name, ndim u8, dims u32*, float64 data)
    | sha256 of everything before it (32 bytes)
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

MAGIC = b"JRNN"
VERSION = 1


class CheckpointError(ValueError):
    pass


def encode_params(named: dict[str, np.ndarray], config: dict | None = None) -> bytes:
    out = bytearray(MAGIC)
    out.append(VERSION)
    cfg = json.dumps(config or {}, sort_keys=True).encode()
    out += struct.pack("<I", len(cfg)) + cfg
    out += struct.pack("<I", len(named))
    for name, value in named.items():
        arr = np.asarray(value, dtype="<f8")
        raw = name.encode()
        out += struct.pack("<H", len(raw)) + raw
        out += struct.pack("<B", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape)
        out += arr.tobytes(order="C")
    out += hashlib.sha256(out).digest()
    return bytes(out)


def decode_params(blob: bytes) -> tuple[dict, dict[str, np.ndarray]]:
    blob = bytes(blob)
    if len(blob) < 45 or blob[:4] != MAGIC:
        raise CheckpointError("not a JRNN checkpoint")
    if blob[4] != VERSION:
        raise CheckpointError(f"unsupported JRNN version {blob[4]}")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError("checkpoint content hash mismatch")
    pos = 5
    (n,) = struct.unpack_from("<I", body, pos)
    pos += 4
    config = json.loads(body[pos:pos + n].decode())
    pos += n
    (count,) = struct.unpack_from("<I", body, pos)
    pos += 4
    named = {}
    for _ in range(count):
        (ln,) = struct.unpack_from("<H", body, pos)
        pos += 2
        name = body[pos:pos + ln].decode()
        pos += ln
        ndim = body[pos]
        pos += 1
        shape = struct.unpack_from(f"<{ndim}I", body, pos)
        pos += 4 * ndim
        size = int(np.prod(shape)) if ndim else 1
        named[name] = np.frombuffer(body, dtype="<f8", count=size, offset=pos).reshape(shape).astype(np.float64)
        pos += 8 * size
    if pos != len(body):
        raise CheckpointError("trailing bytes in checkpoint")
    return config, named


def content_hash(blob: bytes) -> bytes:
    """The 32-byte sha256 stored at the end of a JRNN blob."""
    return bytes(blob[-32:])

"""The JRC1 container.

Layout, little-endian::

    magic "JRC1" | version u8 | mode u8 | width u32 | height u32
    | grid dims 3 x (hb u16, wb u16) | Q_t' 2 x 64 x u16 (zigzag order)
    | model hash (32 bytes)
    | 6 x (length u32, crc32 u32, payload)   luma z, y, x then chroma z, y, x
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

MAGIC = b"JRC1"
VERSION = 1
MODES = {"lossless": 0, "lossy": 1}
SEGMENT_NAMES = ("luma_z", "luma_y", "luma_x", "chroma_z", "chroma_y", "chroma_x")
_HEAD = struct.Struct("<4sBBII6H")
HEADER_BYTES = _HEAD.size + 2 * 64 * 2 + 32


class ContainerError(ValueError):
    pass


@dataclass(frozen=True)
class JrcContainer:
    mode: str
    width: int
    height: int
    grids: tuple  # ((hb, wb), (hcb, wcb), (hcr, wcr))
    inverse_tables: tuple  # two length-64 int arrays, zigzag order
    model_hash: bytes
    segments: tuple  # six payload byte strings

    def to_bytes(self) -> bytes:
        if self.mode not in MODES:
            raise ContainerError(f"unknown mode {self.mode!r}")
        if len(self.segments) != len(SEGMENT_NAMES):
            raise ContainerError("a container holds exactly six segments")
        dims = [d for g in self.grids for d in g]
        out = bytearray(_HEAD.pack(MAGIC, VERSION, MODES[self.mode], self.width, self.height, *dims))
        for table in self.inverse_tables:
            out += np.asarray(table, dtype="<u2").tobytes()
        if len(self.model_hash) != 32:
            raise ContainerError("model hash must be 32 bytes")
        out += self.model_hash
        for seg in self.segments:
            out += struct.pack("<II", len(seg), zlib.crc32(seg)) + seg
        return bytes(out)

    @property
    def payload_bytes(self) -> int:
        return sum(len(s) for s in self.segments)

    @classmethod
    def from_bytes(cls, data: bytes) -> "JrcContainer":
        data = bytes(data)
        if len(data) < HEADER_BYTES:
            raise ContainerError("container is truncated")
        magic, version, mode, width, height, *dims = _HEAD.unpack_from(data, 0)
        if magic != MAGIC:
            raise ContainerError("not a JRC1 container")
        if version != VERSION:
            raise ContainerError(f"unsupported container version {version}")
        modes = {v: k for k, v in MODES.items()}
        if mode not in modes:
            raise ContainerError(f"unknown mode byte {mode}")
        pos = _HEAD.size
        tables = []
        for _ in range(2):
            tables.append(np.frombuffer(data, dtype="<u2", count=64, offset=pos).astype(np.int64))
            pos += 128
        if any(t.min() < 1 or t.max() > 255 for t in tables):
            raise ContainerError("stored quantization steps out of range")
        model_hash = data[pos:pos + 32]
        pos += 32
        segments = []
        for name in SEGMENT_NAMES:
            if pos + 8 > len(data):
                raise ContainerError(f"segment {name} is truncated")
            length, crc = struct.unpack_from("<II", data, pos)
            pos += 8
            seg = data[pos:pos + length]
            if len(seg) != length:
                raise ContainerError(f"segment {name} is truncated")
            if zlib.crc32(seg) != crc:
                raise ContainerError(f"checksum mismatch in segment {name}")
            segments.append(seg)
            pos += length
        if pos != len(data):
            raise ContainerError("trailing bytes after the last segment")
        grids = ((dims[0], dims[1]), (dims[2], dims[3]), (dims[4], dims[5]))
        return cls(modes[mode], width, height, grids, tuple(tables), model_hash, tuple(segments))

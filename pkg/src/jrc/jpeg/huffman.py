from __future__ import annotations

import numpy as np

from . import tables as T
from .types import HuffmanSpec, JpegError

STANDARD_SPECS = {
    ("dc", 0): HuffmanSpec(T.DC_LUMA_BITS, T.DC_LUMA_VALUES),
    ("ac", 0): HuffmanSpec(T.AC_LUMA_BITS, T.AC_LUMA_VALUES),
    ("dc", 1): HuffmanSpec(T.DC_CHROMA_BITS, T.DC_CHROMA_VALUES),
    ("ac", 1): HuffmanSpec(T.AC_CHROMA_BITS, T.AC_CHROMA_VALUES),
}


def canonical_codes(spec: HuffmanSpec) -> dict[int, tuple[int, int]]:
    """symbol -> (code, length) for a DHT table."""
    if len(spec.bits) != 16 or sum(spec.bits) != len(spec.values):
        raise JpegError("malformed Huffman table")
    codes = {}
    code = 0
    k = 0
    for length in range(1, 17):
        for _ in range(spec.bits[length - 1]):
            codes[spec.values[k]] = (code, length)
            code += 1
            k += 1
        if code > (1 << length):
            raise JpegError("Huffman table over-subscribed")
        code <<= 1
    return codes


def decode_lut(spec: HuffmanSpec) -> list[int]:
    """16-bit lookahead table: entry = (length << 8) | symbol, 0 for invalid codes."""
    lut = [0] * 65536
    for symbol, (code, length) in canonical_codes(spec).items():
        shift = 16 - length
        lut[code << shift:(code + 1) << shift] = [(length << 8) | symbol] * (1 << shift)
    return lut


def bit_windows(data: bytes) -> list[int]:
    """Big-endian 32-bit window starting at every byte of ``data`` (padded with 1s)."""
    arr = np.frombuffer(bytes(data) + b"\xff" * 8, dtype=np.uint8).astype(np.uint32)
    win = (arr[:-7] << 24) | (arr[1:-6] << 16) | (arr[2:-5] << 8) | arr[3:-4]
    return win.tolist()


class BitWriter:
    """MSB-first bit packer; byte stuffing is applied in ``getvalue``."""

    def __init__(self):
        self._out = bytearray()
        self._acc = 0
        self._n = 0

    def write(self, value: int, length: int) -> None:
        self._acc = (self._acc << length) | value
        self._n += length
        if self._n >= 32:
            n = self._n
            acc = self._acc
            out = self._out
            while n >= 8:
                n -= 8
                out.append((acc >> n) & 0xFF)
            self._acc = acc & ((1 << n) - 1)
            self._n = n

    def getvalue(self) -> bytes:
        if self._n % 8:
            pad = 8 - self._n % 8
            self.write((1 << pad) - 1, pad)
        n, acc = self._n, self._acc
        while n >= 8:
            n -= 8
            self._out.append((acc >> n) & 0xFF)
        self._acc, self._n = 0, 0
        return bytes(self._out).replace(b"\xff", b"\xff\x00")

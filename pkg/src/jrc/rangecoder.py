"""32-bit range coder driven by static 16-bit cumulative frequency tables.

Everything inside the coder is integer arithmetic. Symbols outside a table's
support are sent through an escape slot followed by an Elias-gamma coded
distance and a sign bit, each bit coded at probability 1/2.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

PRECISION = 16
TOTAL = 1 << PRECISION
_TOP = 1 << 24
_MASK32 = 0xFFFFFFFF
_MAX_GAMMA_BITS = 32


class RangeCoderError(ValueError):
    """Corrupted or truncated range-coded data."""


@dataclass(frozen=True, eq=False)
class CdfTable:
    """Cumulative frequencies for symbols lo..lo+n-1 plus a trailing escape slot.

    ``cum`` has n + 2 entries, starts at 0, ends at 65536 and is strictly
    increasing, so every symbol and the escape have non-zero mass.
    """

    lo: int
    cum: np.ndarray

    def __post_init__(self):
        cum = np.asarray(self.cum, dtype=np.int64)
        if cum.ndim != 1 or cum.size < 3:
            raise ValueError("a CDF table needs at least one symbol and the escape slot")
        if cum[0] != 0 or cum[-1] != TOTAL or np.any(np.diff(cum) < 1):
            raise ValueError("cum must rise strictly from 0 to 65536")
        cum.setflags(write=False)
        object.__setattr__(self, "cum", cum)
        object.__setattr__(self, "lo", int(self.lo))

    @property
    def size(self) -> int:
        return self.cum.size - 2

    @property
    def hi(self) -> int:
        return self.lo + self.size - 1

    @property
    def freqs(self) -> np.ndarray:
        return np.diff(self.cum)

    def code_length(self, symbols) -> float:
        """Ideal bits for ``symbols`` under this table, escapes included."""
        return float(np.sum(symbol_bits(np.asarray(symbols), [self], np.zeros(len(symbols), dtype=np.int64))))


def quantize_cdf(probs, lo: int = 0, escape: int = 1) -> CdfTable:
    """Largest-remainder quantization of a pmf to 16-bit frequencies.

    The escape slot takes frequency ``escape``; every symbol gets at least 1.
    Ties in the remainders go to the lower index.
    """
    p = np.asarray(probs, dtype=np.float64).reshape(-1)
    n = p.size
    if n == 0:
        raise ValueError("empty support")
    if n > TOTAL - 1:
        raise ValueError("support too large for 16-bit frequencies")
    if not 1 <= escape <= TOTAL - n:
        raise ValueError("escape frequency must leave every symbol at least 1")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("probabilities must be finite and non-negative")
    budget = TOTAL - escape
    s = p.sum()
    target = p / s * budget if s > 0 else np.full(n, budget / n)
    freq = np.maximum(np.floor(target).astype(np.int64), 1)
    diff = budget - int(freq.sum())
    if diff > 0:
        order = np.argsort(-(target - np.floor(target)), kind="stable")
        freq[order[:diff]] += 1
    while diff < 0:
        # take back from the largest slots, never dropping one below 1
        order = np.argsort(-freq, kind="stable")
        for i in order[: -diff]:
            if freq[i] > 1:
                freq[i] -= 1
                diff += 1
                if diff == 0:
                    break
    cum = np.zeros(n + 2, dtype=np.int64)
    cum[1:-1] = np.cumsum(freq)
    cum[-1] = TOTAL
    return CdfTable(lo, cum)


def _gamma_bits(d: int) -> int:
    return 2 * d.bit_length()  # (n-1) zeros + n bits + sign


def symbol_bits(symbols: np.ndarray, tables, indexes: np.ndarray) -> np.ndarray:
    """Ideal per-symbol code lengths (bits) under the quantized tables."""
    out = np.empty(len(symbols))
    for k, (v, t) in enumerate(zip(np.asarray(symbols).tolist(), np.asarray(indexes).tolist())):
        tab = tables[t]
        pos = v - tab.lo
        if 0 <= pos < tab.size:
            out[k] = PRECISION - np.log2(tab.cum[pos + 1] - tab.cum[pos])
        else:
            d = v - tab.hi if pos >= tab.size else tab.lo - v
            out[k] = PRECISION - np.log2(int(tab.cum[-1] - tab.cum[-2])) + _gamma_bits(d)
    return out


class _Encoder:
    def __init__(self):
        self.low = 0
        self.range = _MASK32
        self.cache = 0
        self.cache_size = 1
        self.out = bytearray()

    def _shift_low(self):
        low = self.low
        if low < 0xFF000000 or low > _MASK32:
            carry = low >> 32
            temp = self.cache
            while True:
                self.out.append((temp + carry) & 0xFF)
                temp = 0xFF
                self.cache_size -= 1
                if self.cache_size == 0:
                    break
            self.cache = (low >> 24) & 0xFF
        self.cache_size += 1
        self.low = (low << 8) & _MASK32

    def encode(self, start: int, size: int, bits: int):
        r = self.range >> bits
        self.low += start * r
        self.range = size * r
        while self.range < _TOP:
            self.range <<= 8
            self._shift_low()

    def finish(self) -> bytes:
        for _ in range(5):
            self._shift_low()
        return bytes(self.out)


class _Decoder:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.range = _MASK32
        self.code = 0
        for _ in range(5):
            self.code = (self.code << 8) | self._byte()

    def _byte(self) -> int:
        if self.pos >= len(self.data):
            raise RangeCoderError("range-coded stream is truncated")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def target(self, bits: int) -> tuple[int, int]:
        r = self.range >> bits
        t = self.code // r
        if t >> bits:
            raise RangeCoderError("range-coded stream is corrupt")
        return t, r

    def consume(self, start: int, size: int, r: int):
        self.code -= start * r
        self.range = size * r
        while self.range < _TOP:
            self.code = ((self.code << 8) | self._byte()) & _MASK32
            self.range <<= 8


def _write_escape(enc: _Encoder, d: int, negative: bool):
    n = d.bit_length()
    for _ in range(n - 1):
        enc.encode(0, 1, 1)
    for i in range(n - 1, -1, -1):
        enc.encode((d >> i) & 1, 1, 1)
    enc.encode(1 if negative else 0, 1, 1)


def _read_bit(dec: _Decoder) -> int:
    t, r = dec.target(1)
    dec.consume(t, 1, r)
    return t


def _read_escape(dec: _Decoder) -> tuple[int, bool]:
    zeros = 0
    while _read_bit(dec) == 0:
        zeros += 1
        if zeros >= _MAX_GAMMA_BITS:
            raise RangeCoderError("escape length out of range")
    d = 1
    for _ in range(zeros):
        d = (d << 1) | _read_bit(dec)
    return d, bool(_read_bit(dec))


def _flatten(tables):
    offsets = np.zeros(len(tables), dtype=np.int64)
    flat = []
    pos = 0
    for i, t in enumerate(tables):
        offsets[i] = pos
        flat.append(t.cum)
        pos += t.cum.size
    return np.concatenate(flat), offsets


def encode(symbols, tables, indexes=None) -> bytes:
    """Range-code integer ``symbols``; symbol k uses ``tables[indexes[k]]``.

    Without ``indexes`` the tables are taken one per symbol.
    """
    symbols = np.asarray(symbols, dtype=np.int64).reshape(-1)
    if indexes is None:
        if len(tables) != symbols.size:
            raise ValueError("one table per symbol is required when no indexes are given")
        indexes = np.arange(symbols.size)
    indexes = np.asarray(indexes, dtype=np.int64).reshape(-1)
    if indexes.size != symbols.size:
        raise ValueError("indexes and symbols differ in length")
    enc = _Encoder()
    if symbols.size == 0:
        return enc.finish()
    flat, offsets = _flatten(tables)
    los = np.array([t.lo for t in tables], dtype=np.int64)[indexes]
    sizes = np.array([t.size for t in tables], dtype=np.int64)[indexes]
    off = offsets[indexes]
    pos = symbols - los
    inside = (pos >= 0) & (pos < sizes)
    slot = np.where(inside, pos, sizes)
    start = flat[off + slot]
    size = flat[off + slot + 1] - start
    # escape distances: beyond hi or below lo
    dist = np.where(pos >= sizes, pos - sizes + 1, -pos)
    e = enc.encode
    for st, sz, ins, d, neg in zip(start.tolist(), size.tolist(), inside.tolist(), dist.tolist(),
                                   (pos < 0).tolist()):
        e(st, sz, PRECISION)
        if not ins:
            _write_escape(enc, d, neg)
    return enc.finish()


def decode(data: bytes, tables, indexes=None, count: int | None = None) -> np.ndarray:
    """Inverse of :func:`encode` given the identical table sequence."""
    if indexes is None:
        indexes = np.arange(len(tables) if count is None else count)
    indexes = np.asarray(indexes, dtype=np.int64).reshape(-1)
    if count is not None and count != indexes.size:
        raise ValueError("count disagrees with indexes")
    dec = _Decoder(bytes(data))
    cums = [t.cum.tolist() for t in tables]
    los = [t.lo for t in tables]
    out = np.empty(indexes.size, dtype=np.int64)
    for k, ti in enumerate(indexes.tolist()):
        cum = cums[ti]
        t, r = dec.target(PRECISION)
        s = bisect_right(cum, t) - 1
        dec.consume(cum[s], cum[s + 1] - cum[s], r)
        n = len(cum) - 2
        if s < n:
            out[k] = los[ti] + s
        else:
            d, neg = _read_escape(dec)
            out[k] = los[ti] - d if neg else los[ti] + n - 1 + d
    return out

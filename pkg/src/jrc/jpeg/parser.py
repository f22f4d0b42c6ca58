"""Baseline JFIF parser down to quantized DCT coefficients."""

from __future__ import annotations

import struct

import numpy as np

from .huffman import bit_windows, decode_lut
from .tables import ZIGZAG, QuantTable
from .types import (
    CoeffPlane,
    HuffmanSpec,
    InvalidHuffmanCode,
    JpegError,
    JpegImage,
    TruncatedStream,
    UnsupportedJpeg,
    chroma_grid,
)

_SOF_NAMES = {
    0xC1: "extended sequential",
    0xC2: "progressive",
    0xC3: "lossless",
    0xC5: "differential sequential",
    0xC6: "differential progressive",
    0xC7: "differential lossless",
    0xC9: "arithmetic-coded sequential",
    0xCA: "arithmetic-coded progressive",
    0xCB: "arithmetic-coded lossless",
    0xCD: "arithmetic-coded differential sequential",
    0xCE: "arithmetic-coded differential progressive",
    0xCF: "arithmetic-coded differential lossless",
}


def _segment(data: bytes, pos: int) -> tuple[bytes, int]:
    if pos + 2 > len(data):
        raise TruncatedStream("segment length runs past end of file")
    (length,) = struct.unpack(">H", data[pos:pos + 2])
    if length < 2 or pos + length > len(data):
        raise TruncatedStream("segment runs past end of file")
    return data[pos + 2:pos + length], pos + length


def _scan_extent(data: bytes, pos: int) -> tuple[list[bytes], int]:
    """Split entropy-coded data at RST markers; return unstuffed intervals and end offset."""
    intervals = []
    start = pos
    while True:
        i = data.find(b"\xff", pos)
        if i < 0 or i + 1 >= len(data):
            raise TruncatedStream("entropy-coded segment is not terminated by a marker")
        nxt = data[i + 1]
        if nxt == 0x00:
            pos = i + 2
        elif 0xD0 <= nxt <= 0xD7:
            intervals.append(data[start:i].replace(b"\xff\x00", b"\xff"))
            start = pos = i + 2
        elif nxt == 0xFF:
            pos = i + 1
        else:
            intervals.append(data[start:i].replace(b"\xff\x00", b"\xff"))
            return intervals, i


class _Frame:
    def __init__(self):
        self.qt = {}
        self.huff = {}
        self.restart = 0
        self.components = []  # (id, h, v, tq)
        self.width = self.height = 0


def parse_jpeg(data: bytes) -> JpegImage:
    """Parse a baseline 8-bit 4:2:0 Huffman JPEG into coefficient planes.

    Coefficients are returned exactly as stored: natural order within each
    block, DC prediction undone, no dequantization.
    """
    data = bytes(data)
    if len(data) < 4 or data[:2] != b"\xff\xd8":
        raise JpegError("missing SOI marker; not a JPEG file")
    fr = _Frame()
    planes = None
    pos = 2
    while True:
        if pos >= len(data):
            if planes is None:
                raise TruncatedStream("file ended before a scan")
            break
        if data[pos] != 0xFF:
            raise JpegError(f"expected marker at offset {pos}")
        while pos < len(data) and data[pos] == 0xFF:
            pos += 1
        if pos >= len(data):
            raise TruncatedStream("file ends inside a marker")
        marker = data[pos]
        pos += 1
        if marker == 0xD9:
            break
        if marker in _SOF_NAMES:
            raise UnsupportedJpeg(f"{_SOF_NAMES[marker]} JPEG is not supported")
        if marker == 0xCC:
            raise UnsupportedJpeg("arithmetic-coded JPEG is not supported")
        if 0xD0 <= marker <= 0xD7 or marker == 0x01:
            continue
        payload, pos = _segment(data, pos)
        if marker == 0xDB:
            _read_dqt(payload, fr)
        elif marker == 0xC4:
            _read_dht(payload, fr)
        elif marker == 0xC0:
            _read_sof(payload, fr)
        elif marker == 0xDD:
            if len(payload) != 2:
                raise JpegError("malformed DRI segment")
            fr.restart = struct.unpack(">H", payload)[0]
        elif marker == 0xDA:
            if planes is not None:
                raise UnsupportedJpeg("multi-scan baseline JPEG is not supported")
            order, selectors = _read_sos(payload, fr)
            intervals, pos = _scan_extent(data, pos)
            planes = _decode_scan(intervals, fr, order, selectors)
        elif marker == 0xDC:
            raise UnsupportedJpeg("DNL-defined image height is not supported")
        # APPn, COM and anything else: skipped
    if planes is None:
        raise TruncatedStream("no scan data found")
    qts = [fr.qt.get(c[3]) for c in fr.components]
    if any(q is None for q in qts):
        raise JpegError("component references an undefined quantization table")
    if qts[1] != qts[2]:
        raise UnsupportedJpeg("Cb and Cr must share one quantization table")
    huff = {key: spec for key, spec in fr.huff.items()}
    return JpegImage(
        width=fr.width,
        height=fr.height,
        luma=CoeffPlane(planes[0], "luma"),
        cb=CoeffPlane(planes[1], "cb"),
        cr=CoeffPlane(planes[2], "cr"),
        luma_qt=qts[0],
        chroma_qt=qts[1],
        huffman_tables=huff,
    )


def _read_dqt(payload: bytes, fr: _Frame) -> None:
    i = 0
    while i < len(payload):
        pq, tq = payload[i] >> 4, payload[i] & 15
        if pq != 0:
            raise UnsupportedJpeg("16-bit quantization tables are not baseline")
        if i + 65 > len(payload):
            raise TruncatedStream("DQT segment too short")
        steps = np.frombuffer(payload[i + 1:i + 65], dtype=np.uint8).astype(np.int64)
        if np.any(steps == 0):
            raise JpegError("quantization step of zero")
        fr.qt[tq] = QuantTable(steps)
        i += 65


def _read_dht(payload: bytes, fr: _Frame) -> None:
    i = 0
    while i < len(payload):
        if i + 17 > len(payload):
            raise TruncatedStream("DHT segment too short")
        tc, th = payload[i] >> 4, payload[i] & 15
        if tc > 1 or th > 3:
            raise JpegError("invalid Huffman table class or id")
        bits = tuple(payload[i + 1:i + 17])
        n = sum(bits)
        values = tuple(payload[i + 17:i + 17 + n])
        if len(values) != n:
            raise TruncatedStream("DHT segment too short")
        fr.huff[("dc" if tc == 0 else "ac", th)] = HuffmanSpec(bits, values)
        i += 17 + n


def _read_sof(payload: bytes, fr: _Frame) -> None:
    if len(payload) < 6:
        raise TruncatedStream("SOF segment too short")
    precision, height, width, ncomp = struct.unpack(">BHHB", payload[:6])
    if precision != 8:
        raise UnsupportedJpeg(f"{precision}-bit samples are not supported")
    if height == 0 or width == 0:
        raise UnsupportedJpeg("zero-sized or DNL-defined frames are not supported")
    if ncomp != 3:
        raise UnsupportedJpeg(f"expected 3 components (YCbCr), found {ncomp}")
    if len(payload) < 6 + 3 * ncomp:
        raise TruncatedStream("SOF segment too short")
    comps = []
    for k in range(ncomp):
        cid, hv, tq = payload[6 + 3 * k:9 + 3 * k]
        comps.append((cid, hv >> 4, hv & 15, tq))
    sampling = [(c[1], c[2]) for c in comps]
    if sampling != [(2, 2), (1, 1), (1, 1)]:
        raise UnsupportedJpeg(f"only 4:2:0 sampling is supported, found {sampling}")
    fr.components = comps
    fr.width, fr.height = width, height


def _read_sos(payload: bytes, fr: _Frame):
    if not fr.components:
        raise JpegError("SOS before SOF0")
    ns = payload[0]
    if ns != 3 or len(payload) != 1 + 2 * ns + 3:
        raise UnsupportedJpeg("only a single interleaved scan of all three components is supported")
    ids = [c[0] for c in fr.components]
    order, selectors = [], []
    for k in range(ns):
        cid, tdta = payload[1 + 2 * k], payload[2 + 2 * k]
        if cid not in ids:
            raise JpegError(f"scan references unknown component {cid}")
        order.append(ids.index(cid))
        selectors.append((tdta >> 4, tdta & 15))
    ss, se, a = payload[1 + 2 * ns:]
    if (ss, se, a) != (0, 63, 0):
        raise UnsupportedJpeg("spectral selection / successive approximation is not baseline")
    return order, selectors


def _decode_scan(intervals, fr: _Frame, order, selectors):
    width, height = fr.width, fr.height
    hb, wb = -(-height // 8), -(-width // 8)
    chb, cwb = chroma_grid(hb, wb)
    grids = [(hb, wb), (chb, cwb), (chb, cwb)]
    mcux, mcuy = -(-width // 16), -(-height // 16)
    luts = []
    for comp, (td, ta) in zip(order, selectors):
        try:
            dc, ac = fr.huff[("dc", td)], fr.huff[("ac", ta)]
        except KeyError as exc:
            raise JpegError(f"scan uses undefined Huffman table {exc.args[0]}") from None
        luts.append((comp, decode_lut(dc), decode_lut(ac)))
    outs = [[0] * (g[0] * g[1] * 64) for g in grids]
    zz = ZIGZAG.tolist()
    total = mcux * mcuy
    per_interval = fr.restart or total
    expected_intervals = -(-total // per_interval)
    if len(intervals) < expected_intervals:
        raise TruncatedStream("scan has fewer restart intervals than MCUs require")

    try:
        _decode_intervals(intervals[:expected_intervals], outs, grids, luts, zz, mcux, total, per_interval)
    except IndexError:
        raise TruncatedStream("entropy-coded data ended mid-MCU") from None
    planes = []
    for out, (gh, gw) in zip(outs, grids):
        arr = np.array(out, dtype=np.int32).reshape(gh, gw, 64)
        if arr.size and (arr.min() < -1024 or arr.max() > 1023):
            raise JpegError("decoded coefficient outside the 8-bit baseline range")
        planes.append(arr)
    return planes


def _decode_intervals(intervals, outs, grids, luts, zz, mcux, total, per_interval):
    mcu = 0
    for data in intervals:
        win = bit_windows(data)
        nbits = len(data) * 8
        p = 0
        preds = [0, 0, 0]
        stop = min(mcu + per_interval, total)
        while mcu < stop:
            my, mx = divmod(mcu, mcux)
            for comp, dc_lut, ac_lut in luts:
                gh, gw = grids[comp]
                out = outs[comp]
                if comp == 0:
                    cells = ((2 * my, 2 * mx), (2 * my, 2 * mx + 1), (2 * my + 1, 2 * mx), (2 * my + 1, 2 * mx + 1))
                else:
                    cells = ((my, mx),)
                for by, bx in cells:
                    real = by < gh and bx < gw
                    base = (by * gw + bx) * 64
                    # DC
                    e = dc_lut[(win[p >> 3] >> (16 - (p & 7))) & 0xFFFF]
                    if not e:
                        raise InvalidHuffmanCode(f"invalid DC code in MCU {mcu}")
                    p += e >> 8
                    s = e & 0xFF
                    if s:
                        if s > 11:
                            raise InvalidHuffmanCode("DC magnitude category out of range")
                        v = (win[p >> 3] >> (32 - (p & 7) - s)) & ((1 << s) - 1)
                        p += s
                        if v < (1 << (s - 1)):
                            v -= (1 << s) - 1
                        preds[comp] += v
                    if real:
                        out[base] = preds[comp]
                    # AC
                    k = 1
                    while k < 64:
                        e = ac_lut[(win[p >> 3] >> (16 - (p & 7))) & 0xFFFF]
                        if not e:
                            raise InvalidHuffmanCode(f"invalid AC code in MCU {mcu}")
                        p += e >> 8
                        rs = e & 0xFF
                        r, s = rs >> 4, rs & 15
                        if s == 0:
                            if r == 15:
                                k += 16
                                continue
                            break
                        k += r
                        if k > 63:
                            raise InvalidHuffmanCode("AC run past end of block")
                        v = (win[p >> 3] >> (32 - (p & 7) - s)) & ((1 << s) - 1)
                        p += s
                        if v < (1 << (s - 1)):
                            v -= (1 << s) - 1
                        if real:
                            out[base + zz[k]] = v
                        k += 1
                    if k > 64:
                        raise InvalidHuffmanCode("zero run past end of block")
            if p > nbits:
                raise TruncatedStream("entropy-coded data ended mid-MCU")
            mcu += 1

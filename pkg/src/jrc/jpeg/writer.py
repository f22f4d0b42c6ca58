"""Baseline JFIF emission from coefficient planes, plus a forward RGB encoder."""

from __future__ import annotations

import struct

import numpy as np

from .color import downsample_box, rgb_to_ycbcr
from .dct import DCT_64, image_to_blocks, quantize_round
from .huffman import STANDARD_SPECS, BitWriter, canonical_codes
from .tables import ZIGZAG, QuantTable, standard_tables
from .types import JpegError, JpegImage, chroma_grid

_APP0 = b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00"


def _marker(code: int, payload: bytes) -> bytes:
    return struct.pack(">BBH", 0xFF, code, len(payload) + 2) + payload


def _dht_payload() -> bytes:
    out = bytearray()
    for (cls, tid), spec in STANDARD_SPECS.items():
        out.append((0 if cls == "dc" else 1) << 4 | tid)
        out += bytes(spec.bits) + bytes(spec.values)
    return bytes(out)


def _encode_scan(image: JpegImage) -> bytes:
    dc_codes = [canonical_codes(STANDARD_SPECS[("dc", 0)]), canonical_codes(STANDARD_SPECS[("dc", 1)])]
    ac_codes = [canonical_codes(STANDARD_SPECS[("ac", 0)]), canonical_codes(STANDARD_SPECS[("ac", 1)])]
    planes = [p.coeffs[..., ZIGZAG].tolist() for p in image.planes]
    grids = [p.coeffs.shape[:2] for p in image.planes]
    mcux, mcuy = -(-image.width // 16), -(-image.height // 16)
    bw = BitWriter()
    write = bw.write
    preds = [0, 0, 0]
    for my in range(mcuy):
        for mx in range(mcux):
            for comp in range(3):
                gh, gw = grids[comp]
                rows = planes[comp]
                dct, act = (dc_codes[0], ac_codes[0]) if comp == 0 else (dc_codes[1], ac_codes[1])
                if comp == 0:
                    cells = ((2 * my, 2 * mx), (2 * my, 2 * mx + 1), (2 * my + 1, 2 * mx), (2 * my + 1, 2 * mx + 1))
                else:
                    cells = ((my, mx),)
                for by, bx in cells:
                    if by < gh and bx < gw:
                        block = rows[by][bx]
                    else:
                        # dummy block: repeat the predictor so its DC difference is zero
                        block = [preds[comp]] + [0] * 63
                    diff = block[0] - preds[comp]
                    preds[comp] = block[0]
                    s = abs(diff).bit_length()
                    if s > 11:
                        raise JpegError("DC difference out of representable range")
                    code, length = dct[s]
                    write(code, length)
                    if s:
                        write(diff if diff > 0 else diff + (1 << s) - 1, s)
                    run = 0
                    for k in range(1, 64):
                        v = block[k]
                        if v == 0:
                            run += 1
                            continue
                        while run > 15:
                            code, length = act[0xF0]
                            write(code, length)
                            run -= 16
                        s = abs(v).bit_length()
                        if s > 10:
                            raise JpegError(f"AC coefficient {v} out of representable range")
                        code, length = act[(run << 4) | s]
                        write(code, length)
                        write(v if v > 0 else v + (1 << s) - 1, s)
                        run = 0
                    if run:
                        code, length = act[0x00]
                        write(code, length)
    return bw.getvalue()


def serialize_jpeg(image: JpegImage) -> bytes:
    """Emit a baseline 4:2:0 JFIF file with the Annex-K example Huffman tables.

    Quantization tables are written rounded to integers in [1, 255].
    """
    if image.width > 65535 or image.height > 65535:
        raise JpegError("image too large for a baseline frame header")
    out = bytearray(b"\xff\xd8")
    out += _marker(0xE0, _APP0)
    dqt = bytearray()
    for tid, qt in enumerate((image.luma_qt, image.chroma_qt)):
        dqt.append(tid)
        dqt += bytes(qt.serialized().astype(np.uint8).tolist())
    out += _marker(0xDB, bytes(dqt))
    sof = struct.pack(">BHHB", 8, image.height, image.width, 3)
    sof += bytes([1, 0x22, 0, 2, 0x11, 1, 3, 0x11, 1])
    out += _marker(0xC0, sof)
    out += _marker(0xC4, _dht_payload())
    sos = bytes([3, 1, 0x00, 2, 0x11, 3, 0x11, 0, 63, 0])
    out += _marker(0xDA, sos)
    out += _encode_scan(image)
    out += b"\xff\xd9"
    return bytes(out)


def with_tables(image: JpegImage, luma_qt: QuantTable, chroma_qt: QuantTable) -> JpegImage:
    return JpegImage(image.width, image.height, image.luma, image.cb, image.cr, luma_qt, chroma_qt)


def encode_rgb(rgb, quality: int = 75) -> JpegImage:
    """Forward JPEG encode of an 8-bit RGB array to coefficient level.

    Chroma is subsampled by 2x2 box averaging; edges are padded by
    replication to whole blocks before the DCT.
    """
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.shape[0] < 1 or rgb.shape[1] < 1:
        raise ValueError(f"expected a non-empty (h, w, 3) RGB array, got shape {rgb.shape}")
    height, width = rgb.shape[:2]
    hb, wb = -(-height // 8), -(-width // 8)
    chb, cwb = chroma_grid(hb, wb)
    ycc = rgb_to_ycbcr(rgb.astype(np.float64))
    luma_qt, chroma_qt = standard_tables(quality)

    def plane(samples, nb_h, nb_w, qt, name):
        samples = np.pad(
            samples,
            ((0, nb_h * 8 - samples.shape[0]), (0, nb_w * 8 - samples.shape[1])),
            mode="edge",
        )
        coeffs = (image_to_blocks(samples - 128.0)) @ DCT_64.T
        return quantize_round(coeffs, qt, name)

    y = plane(ycc[..., 0], hb, wb, luma_qt, "luma")
    cb = plane(downsample_box(ycc[..., 1])[: chb * 8, : cwb * 8], chb, cwb, chroma_qt, "cb")
    cr = plane(downsample_box(ycc[..., 2])[: chb * 8, : cwb * 8], chb, cwb, chroma_qt, "cr")
    return JpegImage(width, height, y, cb, cr, luma_qt, chroma_qt)


def compress_rgb(rgb, quality: int = 75) -> bytes:
    return serialize_jpeg(encode_rgb(rgb, quality))


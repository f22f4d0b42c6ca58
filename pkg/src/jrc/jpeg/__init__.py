"""Coefficient-level baseline JPEG I/O."""

from .color import reconstruct_from_blocks, reconstruct_rgb, rgb_to_ycbcr, to_uint8, ycbcr_to_rgb
from .dct import dct_8x8, dequantize, idct_8x8, quantize_round, round_half_away
from .parser import parse_jpeg
from .tables import (
    CHROMA_BASE,
    LUMA_BASE,
    QuantTable,
    ijg_scale_table,
    standard_tables,
    unzigzag,
    zigzag,
)
from .types import (
    CoeffPlane,
    InvalidHuffmanCode,
    JpegError,
    JpegImage,
    TruncatedStream,
    UnsupportedJpeg,
)
from .writer import compress_rgb, encode_rgb, serialize_jpeg, with_tables

__all__ = [
    "CHROMA_BASE", "LUMA_BASE", "CoeffPlane", "InvalidHuffmanCode", "JpegError", "JpegImage",
    "QuantTable", "TruncatedStream", "UnsupportedJpeg", "compress_rgb", "dct_8x8", "dequantize",
    "encode_rgb", "idct_8x8", "ijg_scale_table", "parse_jpeg", "quantize_round", "reconstruct_from_blocks",
    "reconstruct_rgb", "rgb_to_ycbcr", "round_half_away", "serialize_jpeg", "standard_tables",
    "to_uint8", "unzigzag", "with_tables", "ycbcr_to_rgb", "zigzag",
]

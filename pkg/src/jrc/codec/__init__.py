"""End-to-end recompression: JPEG bytes <-> JRC1 containers."""

from ..grid import pad_and_mask
from .container import ContainerError, JrcContainer
from .pipeline import (
    ModelMismatch,
    compress,
    compress_image,
    decompress,
    decompress_image,
    lossless_mode_tables,
    quantize_symbols,
)

__all__ = [
    "ContainerError", "JrcContainer", "ModelMismatch", "compress", "compress_image", "decompress",
    "decompress_image", "lossless_mode_tables", "pad_and_mask", "quantize_symbols",
]

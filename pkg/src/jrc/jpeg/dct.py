"""Orthonormal 8x8 DCT-II/III and (de)quantization of coefficient planes."""

from __future__ import annotations

import numpy as np

from .tables import QuantTable
from .types import COEFF_MAX, COEFF_MIN, CoeffPlane


def dct_matrix(n: int = 8) -> np.ndarray:
    """Orthonormal DCT-II basis, rows indexed by frequency."""
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    c = np.cos(np.pi * (2 * i + 1) * k / (2 * n)) * np.sqrt(2.0 / n)
    c[0] /= np.sqrt(2.0)
    return c


DCT8 = dct_matrix(8)
# Maps 64 natural-order coefficients to 64 row-major pixels of one block.
IDCT_64 = np.kron(DCT8.T, DCT8.T)
DCT_64 = IDCT_64.T


def dct_8x8(pixels) -> np.ndarray:
    """Forward DCT of (..., 8, 8) level-shifted pixel blocks."""
    pixels = np.asarray(pixels, dtype=np.float64)
    return DCT8 @ pixels @ DCT8.T


def idct_8x8(coeffs) -> np.ndarray:
    """Inverse DCT of (..., 8, 8) coefficient blocks; no level shift."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    return DCT8.T @ coeffs @ DCT8


def round_half_away(values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def dequantize(plane: CoeffPlane, qt: QuantTable) -> np.ndarray:
    """Dequantized coefficient blocks, shape (hb, wb, 64), natural order."""
    return plane.coeffs.astype(np.float64) * qt.natural


def quantize_round(blocks, qt: QuantTable, component: str = "luma") -> CoeffPlane:
    blocks = np.asarray(blocks, dtype=np.float64)
    q = round_half_away(blocks / qt.natural)
    return CoeffPlane(np.clip(q, COEFF_MIN, COEFF_MAX).astype(np.int32), component)


def blocks_to_image(blocks: np.ndarray) -> np.ndarray:
    """(hb, wb, 64) pixel blocks to an (8 hb, 8 wb) image."""
    hb, wb, _ = blocks.shape
    return blocks.reshape(hb, wb, 8, 8).transpose(0, 2, 1, 3).reshape(hb * 8, wb * 8)


def image_to_blocks(image: np.ndarray) -> np.ndarray:
    """(8 hb, 8 wb) image to (hb, wb, 64) row-major blocks."""
    h, w = image.shape
    return image.reshape(h // 8, 8, w // 8, 8).transpose(0, 2, 1, 3).reshape(h // 8, w // 8, 64)

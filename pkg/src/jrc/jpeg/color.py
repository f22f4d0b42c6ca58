"""JFIF color conversion, 4:2:0 resampling and pixel reconstruction."""

from __future__ import annotations

import numpy as np

from .dct import IDCT_64, blocks_to_image, dequantize
from .types import JpegImage

# BT.601 full range, as JFIF specifies.
YCC_TO_RGB = np.array([
    [1.0, 0.0, 1.402],
    [1.0, -0.3441362862, -0.7141362862],
    [1.0, 1.772, 0.0],
])
RGB_TO_YCC = np.array([
    [0.299, 0.587, 0.114],
    [-0.1687358916, -0.3312641084, 0.5],
    [0.5, -0.4186875892, -0.08131241085],
])


def rgb_to_ycbcr(rgb) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    ycc = rgb @ RGB_TO_YCC.T
    ycc[..., 1:] += 128.0
    return ycc


def ycbcr_to_rgb(ycc) -> np.ndarray:
    ycc = np.asarray(ycc, dtype=np.float64).copy()
    ycc[..., 1:] -= 128.0
    return ycc @ YCC_TO_RGB.T


def upsample_replicate(plane: np.ndarray, factor: int = 2) -> np.ndarray:
    return np.repeat(np.repeat(plane, factor, axis=0), factor, axis=1)


def downsample_box(plane: np.ndarray) -> np.ndarray:
    """2x2 box average; odd edges are replicated first."""
    h, w = plane.shape
    if h % 2 or w % 2:
        plane = np.pad(plane, ((0, h % 2), (0, w % 2)), mode="edge")
    h, w = plane.shape
    return plane.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def blocks_to_pixels(blocks: np.ndarray) -> np.ndarray:
    """Dequantized (hb, wb, 64) coefficient blocks to a level-shifted sample plane."""
    return blocks_to_image(blocks @ IDCT_64.T) + 128.0


def reconstruct_from_blocks(luma, cb, cr, width: int, height: int, clamp: bool = True) -> np.ndarray:
    """RGB image (height, width, 3) from dequantized coefficient blocks.

    Chroma is upsampled by sample replication. With ``clamp`` the decoded
    Y/Cb/Cr samples are rounded to 8 bits like a real decoder and the RGB
    output is limited to [0, 255] (float, not rounded). Without it the whole
    path is linear.
    """
    planes = [blocks_to_pixels(np.asarray(b, dtype=np.float64)) for b in (luma, cb, cr)]
    if clamp:
        planes = [np.clip(np.floor(p + 0.5), 0.0, 255.0) for p in planes]
    y, c_b, c_r = planes[0], upsample_replicate(planes[1]), upsample_replicate(planes[2])
    ycc = np.stack([y[:height, :width], c_b[:height, :width], c_r[:height, :width]], axis=-1)
    rgb = ycbcr_to_rgb(ycc)
    return np.clip(rgb, 0.0, 255.0) if clamp else rgb


def reconstruct_rgb(image: JpegImage, clamp: bool = True) -> np.ndarray:
    """Decode a coefficient-level image to float RGB in [0, 255]."""
    return reconstruct_from_blocks(
        dequantize(image.luma, image.luma_qt),
        dequantize(image.cb, image.chroma_qt),
        dequantize(image.cr, image.chroma_qt),
        image.width,
        image.height,
        clamp=clamp,
    )


def to_uint8(rgb: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)

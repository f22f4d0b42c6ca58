"""Block-grid padding and the coefficient-plane <-> model-tensor packing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jpeg import JpegImage

DEFAULT_PAD_MULTIPLE = 64


def pad_and_mask(grid: tuple[int, int], multiple: int = DEFAULT_PAD_MULTIPLE) -> tuple[tuple[int, int], np.ndarray]:
    """Round a (hb, wb) block grid up to ``multiple`` and mark the true blocks.

    Returns the padded grid and a boolean (ph, pw) mask.
    """
    hb, wb = int(grid[0]), int(grid[1])
    if hb < 1 or wb < 1:
        raise ValueError(f"block grid must be at least 1x1, got {grid}")
    ph, pw = -(-hb // multiple) * multiple, -(-wb // multiple) * multiple
    mask = np.zeros((ph, pw), dtype=bool)
    mask[:hb, :wb] = True
    return (ph, pw), mask


def plane_to_channels(coeffs: np.ndarray, padded: tuple[int, int]) -> np.ndarray:
    """(hb, wb, 64) -> (64, ph, pw) zero-padded, natural frequency order in channels."""
    out = np.zeros((64,) + tuple(padded), dtype=np.float64)
    hb, wb = coeffs.shape[:2]
    out[:, :hb, :wb] = np.moveaxis(coeffs, 2, 0)
    return out


def channels_to_plane(channels: np.ndarray, grid: tuple[int, int]) -> np.ndarray:
    """Inverse of plane_to_channels: crop and move the frequency axis last."""
    hb, wb = grid
    return np.moveaxis(np.asarray(channels)[:, :hb, :wb], 0, 2)


@dataclass
class PlaneBatch:
    """Dequantized coefficients of a batch of same-size images, packed for the models.

    luma: (B, 64, ph, pw); chroma: (B, 128, pch, pcw) with Cb in channels 0..63
    and Cr in 64..127. Values are coefficient * stored step, i.e. the DCT
    coefficients I the input files describe.
    """

    luma: np.ndarray
    chroma: np.ndarray
    luma_mask: np.ndarray
    chroma_mask: np.ndarray
    luma_grid: tuple[int, int]
    chroma_grid: tuple[int, int]
    width: int
    height: int

    @property
    def batch_size(self) -> int:
        return self.luma.shape[0]

    @property
    def pixel_count(self) -> int:
        return self.batch_size * self.width * self.height

    def take(self, index) -> "PlaneBatch":
        index = np.asarray(index)
        return PlaneBatch(self.luma[index], self.chroma[index], self.luma_mask, self.chroma_mask,
                          self.luma_grid, self.chroma_grid, self.width, self.height)


def pack_images(images: list[JpegImage], multiple: int = DEFAULT_PAD_MULTIPLE) -> PlaneBatch:
    """Dequantize and pack images that share pixel dimensions."""
    if not images:
        raise ValueError("empty image list")
    w, h = images[0].width, images[0].height
    if any((im.width, im.height) != (w, h) for im in images):
        raise ValueError("images in one batch must share dimensions")
    lgrid = images[0].luma.coeffs.shape[:2]
    cgrid = images[0].cb.coeffs.shape[:2]
    lpad, lmask = pad_and_mask(lgrid, multiple)
    cpad, cmask = pad_and_mask(cgrid, multiple)
    luma, chroma = [], []
    for im in images:
        luma.append(plane_to_channels(im.luma.coeffs * im.luma_qt.natural, lpad))
        chroma.append(np.concatenate([
            plane_to_channels(im.cb.coeffs * im.chroma_qt.natural, cpad),
            plane_to_channels(im.cr.coeffs * im.chroma_qt.natural, cpad),
        ]))
    return PlaneBatch(np.stack(luma), np.stack(chroma), lmask, cmask, tuple(lgrid), tuple(cgrid), w, h)

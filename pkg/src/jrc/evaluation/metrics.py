"""Image quality metrics on 8-bit RGB arrays."""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import correlate1d

MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
MS_SSIM_MIN_SIDE = 176  # an 11-tap window must still fit after four halvings


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a, b = a[..., None], b[..., None]
    if a.ndim != 3:
        raise ValueError(f"expected (h, w) or (h, w, c) images, got {a.shape}")
    return a, b


def mse(a, b, max_val: float = 255.0) -> float:
    """Mean squared error with samples scaled to [0, 1]."""
    a, b = _pair(a, b)
    return float(np.mean(((a - b) / max_val) ** 2))


def psnr(a, b, max_val: float = 255.0) -> float:
    """10 log10(1 / MSE) on [0, 1]-scaled samples; identical inputs give +inf."""
    err = mse(a, b, max_val)
    return math.inf if err == 0 else 10.0 * math.log10(1.0 / err)


def _gauss_1d(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-0.5 * x * x / sigma ** 2)
    return g / g.sum()


def _filter_valid(img: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Separable correlation over the first two axes, keeping only full windows."""
    r = taps.size // 2
    out = correlate1d(img, taps, axis=0, mode="constant")
    out = correlate1d(out, taps, axis=1, mode="constant")
    h, w = img.shape[:2]
    return out[r:h - (taps.size - 1 - r), r:w - (taps.size - 1 - r)]


def _ssim_terms(a, b, taps, max_val, k1, k2):
    c1, c2 = (k1 * max_val) ** 2, (k2 * max_val) ** 2
    mu_a, mu_b = _filter_valid(a, taps), _filter_valid(b, taps)
    num0 = 2 * mu_a * mu_b
    den0 = mu_a ** 2 + mu_b ** 2
    lum = (num0 + c1) / (den0 + c1)
    num1 = 2 * _filter_valid(a * b, taps)
    den1 = _filter_valid(a * a + b * b, taps)
    cs = (num1 - num0 + c2) / (den1 - den0 + c2)
    return (lum * cs).mean(axis=(0, 1)), cs.mean(axis=(0, 1))


def _halve(img: np.ndarray) -> np.ndarray:
    """2x2 average pooling; odd sides are first extended by mirroring the last row/column."""
    h, w = img.shape[:2]
    img = np.pad(img, ((0, h % 2), (0, w % 2), (0, 0)), mode="symmetric")
    h, w = img.shape[:2]
    return img.reshape(h // 2, 2, w // 2, 2, -1).mean(axis=(1, 3))


def ms_ssim(a, b, max_val: float = 255.0, filter_size: int = 11, filter_sigma: float = 1.5,
            k1: float = 0.01, k2: float = 0.03, weights=MS_SSIM_WEIGHTS) -> float:
    """Five-scale structural similarity, averaged over channels."""
    a, b = _pair(a, b)
    if min(a.shape[:2]) < MS_SSIM_MIN_SIDE:
        raise ValueError(f"images must be at least {MS_SSIM_MIN_SIDE} pixels on each side")
    taps = _gauss_1d(filter_size, filter_sigma)
    factors = []
    for k in range(len(weights)):
        if k:
            a, b = _halve(a), _halve(b)
        ssim_c, cs_c = _ssim_terms(a, b, taps, max_val, k1, k2)
        factors.append(np.maximum(cs_c, 0.0))
    factors[-1] = np.maximum(ssim_c, 0.0)
    value = np.prod([f ** w for f, w in zip(factors, weights)], axis=0)
    return float(np.mean(value))

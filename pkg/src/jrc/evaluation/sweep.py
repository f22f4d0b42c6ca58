"""Rate-distortion sweeps over trained checkpoints, written as CSV.

Quality is measured against the input JPEG's own decoded pixels (the
compression target), not against any original uncompressed image.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from ..codec import JrcContainer, compress_image, decompress_image
from ..entropy import CodecModel
from ..jpeg import parse_jpeg, reconstruct_rgb
from ..rd.tables import LearnedTables
from .metrics import ms_ssim, psnr

CSV_FIELDS = ("lambda_r", "lambda_d", "bpp", "psnr_db", "ms_ssim", "lossless_bpp", "jpeg_bpp")
CSV_NOTE = "# psnr_db and ms_ssim are measured against the input JPEG reconstruction"


@dataclass(frozen=True)
class RdPoint:
    lambda_r: float
    lambda_d: float
    bpp: float
    psnr_db: float
    ms_ssim: float
    lossless_bpp: float
    jpeg_bpp: float

    def __post_init__(self):
        if not self.bpp > 0:
            raise ValueError("bpp must be positive")
        if not (self.psnr_db > 0):
            raise ValueError("psnr must be positive or +inf")
        if not 0 < self.ms_ssim <= 1:
            raise ValueError("ms_ssim must lie in (0, 1]")


@dataclass(frozen=True)
class Checkpoint:
    """A model with its tables; ``tables=None`` is the lossless row."""

    model: CodecModel
    tables: LearnedTables | None
    lambda_r: float = 0.0
    lambda_d: float = 0.0


@dataclass(frozen=True)
class ImageResult:
    bpp: float
    psnr_db: float
    ms_ssim: float
    lossless_bpp: float
    jpeg_bpp: float


def evaluate_image(jpeg_bytes: bytes, ckpt: Checkpoint) -> ImageResult:
    image = parse_jpeg(jpeg_bytes)
    pixels = image.pixel_count
    reference = reconstruct_rgb(image)
    lossless = compress_image(image, ckpt.model, None).to_bytes()
    if ckpt.tables is None:
        blob = lossless
    else:
        blob = compress_image(image, ckpt.model, ckpt.tables).to_bytes()
    decoded = reconstruct_rgb(decompress_image(JrcContainer.from_bytes(blob), ckpt.model))
    return ImageResult(
        bpp=8.0 * len(blob) / pixels,
        psnr_db=psnr(reference, decoded),
        ms_ssim=ms_ssim(reference, decoded),
        lossless_bpp=8.0 * len(lossless) / pixels,
        jpeg_bpp=8.0 * len(jpeg_bytes) / pixels,
    )


def rd_sweep(checkpoints: list[Checkpoint], jpegs: list[bytes]) -> list[RdPoint]:
    """One row per checkpoint, averaged over images in order."""
    if not jpegs:
        raise ValueError("no test images")
    rows = []
    for ck in checkpoints:
        res = [evaluate_image(j, ck) for j in jpegs]
        rows.append(RdPoint(
            lambda_r=float(ck.lambda_r), lambda_d=float(ck.lambda_d),
            bpp=float(np.mean([r.bpp for r in res])),
            psnr_db=float(np.mean([r.psnr_db for r in res])),  # +inf if any image is exact
            ms_ssim=float(np.mean([r.ms_ssim for r in res])),
            lossless_bpp=float(np.mean([r.lossless_bpp for r in res])),
            jpeg_bpp=float(np.mean([r.jpeg_bpp for r in res])),
        ))
    return rows


def write_csv(rows: list[RdPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(CSV_NOTE + "\n")
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for r in rows:
            w.writerow([repr(float(getattr(r, f))) for f in CSV_FIELDS])


def read_csv(path) -> list[RdPoint]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV columns {reader.fieldnames}")
    return [RdPoint(**{f.name: float(row[f.name]) for f in fields(RdPoint)}) for row in reader]


def load_jpegs(directory) -> list[bytes]:
    return [p.read_bytes() for p in sorted(Path(directory).glob("*.jpg"))]

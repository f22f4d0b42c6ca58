"""Corpus preparation, quality metrics and rate-distortion sweeps."""

from .corpus import CorpusManifest, Split, crop_tiles, generate_tiles, prepare_corpus, read_rgb
from .metrics import MS_SSIM_WEIGHTS, ms_ssim, mse, psnr
from .sweep import CSV_FIELDS, Checkpoint, ImageResult, RdPoint, evaluate_image, load_jpegs, rd_sweep, read_csv, write_csv

__all__ = [
    "CSV_FIELDS", "Checkpoint", "CorpusManifest", "ImageResult", "MS_SSIM_WEIGHTS", "RdPoint", "Split",
    "crop_tiles", "evaluate_image", "generate_tiles", "load_jpegs", "ms_ssim", "mse", "prepare_corpus",
    "psnr", "rd_sweep", "read_csv", "read_rgb", "write_csv",
]

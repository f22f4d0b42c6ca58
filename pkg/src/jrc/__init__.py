"""Unified lossy/lossless JPEG recompression with learned tables and a hyperprior entropy model."""

__version__ = "0.1.0"

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tables import QuantTable

COEFF_MIN = -1024
COEFF_MAX = 1023
COMPONENTS = ("luma", "cb", "cr")


class JpegError(ValueError):
    """Base class for JPEG parsing and emission failures."""


class UnsupportedJpeg(JpegError):
    """The file uses a JPEG feature outside baseline 8-bit 4:2:0 Huffman coding."""


class TruncatedStream(JpegError):
    pass


class InvalidHuffmanCode(JpegError):
    pass


@dataclass(frozen=True, eq=False)
class CoeffPlane:
    """Quantized DCT coefficients of one component.

    ``coeffs`` has shape (height_blocks, width_blocks, 64), natural order
    inside each block, absolute (not differential) DC.
    """

    coeffs: np.ndarray
    component: str = "luma"

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs)
        if coeffs.ndim != 3 or coeffs.shape[2] != 64:
            raise ValueError(f"coefficient plane must be (hb, wb, 64), got {coeffs.shape}")
        if coeffs.shape[0] < 1 or coeffs.shape[1] < 1:
            raise ValueError("coefficient plane must contain at least one block")
        if self.component not in COMPONENTS:
            raise ValueError(f"unknown component {self.component!r}")
        if coeffs.size and (coeffs.min() < COEFF_MIN or coeffs.max() > COEFF_MAX):
            raise ValueError(f"coefficients must lie in [{COEFF_MIN}, {COEFF_MAX}]")
        coeffs = coeffs.astype(np.int32, copy=True)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def height_blocks(self) -> int:
        return self.coeffs.shape[0]

    @property
    def width_blocks(self) -> int:
        return self.coeffs.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoeffPlane):
            return NotImplemented
        return self.component == other.component and np.array_equal(self.coeffs, other.coeffs)


@dataclass(frozen=True, eq=False)
class HuffmanSpec:
    """A DHT table as stored in the file: code counts per length and symbols."""

    bits: tuple
    values: tuple

    def __eq__(self, other):
        if not isinstance(other, HuffmanSpec):
            return NotImplemented
        return tuple(self.bits) == tuple(other.bits) and tuple(self.values) == tuple(other.values)


def chroma_grid(luma_hb: int, luma_wb: int) -> tuple[int, int]:
    return (luma_hb + 1) // 2, (luma_wb + 1) // 2


@dataclass(frozen=True, eq=False)
class JpegImage:
    """A baseline 4:2:0 JPEG held at the level of quantized coefficients."""

    width: int
    height: int
    luma: CoeffPlane
    cb: CoeffPlane
    cr: CoeffPlane
    luma_qt: QuantTable
    chroma_qt: QuantTable
    huffman_tables: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        hb, wb = -(-self.height // 8), -(-self.width // 8)
        if (self.luma.height_blocks, self.luma.width_blocks) != (hb, wb):
            raise ValueError(
                f"luma grid {self.luma.coeffs.shape[:2]} does not match {self.width}x{self.height}"
            )
        expected = chroma_grid(hb, wb)
        for plane in (self.cb, self.cr):
            if (plane.height_blocks, plane.width_blocks) != expected:
                raise ValueError(f"chroma grid must be {expected}, got {plane.coeffs.shape[:2]}")

    @property
    def planes(self) -> tuple[CoeffPlane, CoeffPlane, CoeffPlane]:
        return self.luma, self.cb, self.cr

    def table_for(self, component: str) -> QuantTable:
        return self.luma_qt if component == "luma" else self.chroma_qt

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    def same_coefficients(self, other: "JpegImage") -> bool:
        return (
            (self.width, self.height) == (other.width, other.height)
            and all(a == b for a, b in zip(self.planes, other.planes))
            and self.luma_qt == other.luma_qt
            and self.chroma_qt == other.chroma_qt
        )

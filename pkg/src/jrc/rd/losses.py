"""The model loss L_m, the table loss L_q and the RGB-domain distortion D."""

from __future__ import annotations

import contextlib
from dataclasses import dataclass

from ..entropy import CodecModel, RateReport
from ..grid import PlaneBatch
from ..jpeg.color import YCC_TO_RGB
from ..jpeg.dct import IDCT_64
from ..nn import Tensor, concat, conv2d, depth_to_space, ste_round, upsample_nearest
from .tables import LearnedTables

# 8-bit sample scale: D is a [0, 1]-scaled MSE, the loss weights it per 8-bit unit.
PIXEL_SCALE = 255.0
_IDCT_KERNEL = Tensor(IDCT_64.reshape(64, 64, 1, 1))


@dataclass(frozen=True)
class TradeoffPoint:
    lambda_r: float
    lambda_d: float

    def __post_init__(self):
        if self.lambda_r < 0 or self.lambda_d < 0:
            raise ValueError("trade-off weights must be non-negative")
        if self.lambda_r == 0 and self.lambda_d == 0:
            raise ValueError("lambda_r and lambda_d cannot both be zero")


@contextlib.contextmanager
def frozen(params):
    """Temporarily exclude parameters from the graph."""
    params = list(params)
    saved = [p.requires_grad for p in params]
    for p in params:
        p.requires_grad = False
    try:
        yield
    finally:
        for p, s in zip(params, saved):
            p.requires_grad = s


def _table_tensor(step: Tensor, repeat: int) -> Tensor:
    if repeat > 1:
        step = concat([step] * repeat, axis=0)
    return step.reshape(1, 64 * repeat, 1, 1)


def quantize(batch: PlaneBatch, tables: LearnedTables) -> tuple[Tensor, Tensor]:
    """x = ste_round(I / Q_t) for the luma and chroma groups."""
    xl = ste_round(Tensor(batch.luma) / _table_tensor(tables.step("qt_luma"), 1))
    xc = ste_round(Tensor(batch.chroma) / _table_tensor(tables.step("qt_chroma"), 2))
    return xl, xc


def _pixels(coeffs: Tensor) -> Tensor:
    """(B, 64, hb, wb) coefficient blocks -> (B, 1, 8 hb, 8 wb) samples."""
    return depth_to_space(conv2d(coeffs, _IDCT_KERNEL), 8)


def distortion(batch: PlaneBatch, x_luma: Tensor, x_chroma: Tensor, tables: LearnedTables,
               domain: str = "rgb") -> Tensor:
    """Mean squared error between the reconstructions of I and x * Q_t', pixels in [0, 1].

    The path is linear (no clamping), so only the coefficient difference is
    transformed. ``domain="ycc"`` measures per-component sample MSE instead.
    """
    dl = Tensor(batch.luma) - x_luma * _table_tensor(tables.step("qti_luma"), 1)
    dc = Tensor(batch.chroma) - x_chroma * _table_tensor(tables.step("qti_chroma"), 2)
    h, w = batch.height, batch.width
    y = _pixels(dl)[:, :, :h, :w]
    cb = upsample_nearest(_pixels(dc[:, :64]), 2)[:, :, :h, :w]
    cr = upsample_nearest(_pixels(dc[:, 64:]), 2)[:, :, :h, :w]
    if domain == "ycc":
        planes = [y, cb, cr]
    elif domain == "rgb":
        planes = [y * float(m[0]) + cb * float(m[1]) + cr * float(m[2]) for m in YCC_TO_RGB]
    else:
        raise ValueError(f"unknown distortion domain {domain!r}")
    total = None
    for p in planes:
        s = (p * p).sum()
        total = s if total is None else total + s
    return total * (1.0 / (3 * batch.batch_size * h * w * PIXEL_SCALE ** 2))


def batch_rate(model: CodecModel, x_luma: Tensor, x_chroma: Tensor, batch: PlaneBatch,
               relaxation: str = "noise", rng=None) -> RateReport:
    luma = model.luma.rate(x_luma, relaxation, rng, batch.luma_mask, batch.pixel_count)
    chroma = model.chroma.rate(x_chroma, relaxation, rng, batch.chroma_mask, batch.pixel_count)
    return luma + chroma


def loss_model(model: CodecModel, tables: LearnedTables, batch: PlaneBatch, rng,
               relaxation: str = "noise") -> tuple[Tensor, RateReport]:
    """L_m: the rate of the batch in bits. Q_t is held fixed."""
    with frozen(tables.parameters()):
        xl, xc = quantize(batch, tables)
    report = batch_rate(model, xl, xc, batch, relaxation, rng)
    return report.total, report


def loss_rd(model: CodecModel, tables: LearnedTables, batch: PlaneBatch, point: TradeoffPoint, rng,
            relaxation: str = "noise", domain: str = "rgb") -> tuple[Tensor, RateReport, Tensor]:
    """L_q = lambda_r * bits + lambda_d * (255^2 D) * pixels. theta is held fixed.

    Dividing by the batch pixel count gives lambda_r * bpp + lambda_d * MSE on
    the 8-bit scale.
    """
    with frozen(model.parameters()):
        xl, xc = quantize(batch, tables)
        report = batch_rate(model, xl, xc, batch, relaxation, rng)
        d = distortion(batch, xl, xc, tables, domain)
    loss = report.total * point.lambda_r + d * (point.lambda_d * PIXEL_SCALE ** 2 * batch.pixel_count)
    return loss, report, d

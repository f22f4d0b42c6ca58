"""compress / decompress: JPEG bytes <-> JRC1 container."""

from __future__ import annotations

import numpy as np

from ..entropy import CodecModel, HyperpriorModel
from ..grid import channels_to_plane, pack_images, pad_and_mask
from ..jpeg import CoeffPlane, JpegImage, QuantTable, parse_jpeg, serialize_jpeg
from ..jpeg.dct import round_half_away
from ..jpeg.types import COEFF_MAX, COEFF_MIN
from ..nn import no_grad
from ..rangecoder import decode, encode
from ..rd.tables import LearnedTables
from .coding_tables import gaussian_tables, prior_tables, scale_index
from .container import ContainerError, JrcContainer


class ModelMismatch(ContainerError):
    pass


def lossless_mode_tables(image: JpegImage) -> LearnedTables:
    """Q_t = Q_t' = the image's own tables, so x reproduces the stored coefficients."""
    return LearnedTables.from_quant_tables(image.luma_qt, image.chroma_qt, trainable=False)


def quantize_symbols(image: JpegImage, tables: LearnedTables, pad_multiple: int):
    """Hard-rounded x for both plane groups, clipped to the baseline coefficient range."""
    batch = pack_images([image], pad_multiple)
    ql = tables.values("qt_luma").reshape(1, 64, 1, 1)
    qc = np.tile(tables.values("qt_chroma"), 2).reshape(1, 128, 1, 1)
    xl = np.clip(round_half_away(batch.luma / ql), COEFF_MIN, COEFF_MAX)
    xc = np.clip(round_half_away(batch.chroma / qc), COEFF_MIN, COEFF_MAX)
    return batch, xl, xc


def _latent_shapes(padded: tuple[int, int]) -> tuple[tuple[int, int], tuple[int, int]]:
    yh, yw = -(-padded[0] // 16), -(-padded[1] // 16)
    return (yh, yw), (-(-yh // 4), -(-yw // 4))


class _GroupCoder:
    """Codes one plane group (luma, or Cb+Cr) in the order z-hat, y-hat, x."""

    def __init__(self, model: HyperpriorModel):
        self.model = model
        self.ztables = prior_tables(model.prior)
        self.gtables = gaussian_tables()

    def _z_indexes(self, shape):
        m, h, w = shape
        return np.repeat(np.arange(m), h * w)

    def encode(self, x: np.ndarray, mask: np.ndarray) -> tuple[bytes, bytes, bytes]:
        with no_grad():
            y = self.model.analysis(x).data
            z = self.model.hyper_analysis(y).data
            z_hat = round_half_away(z)
            y_hat = round_half_away(y)
            sigma_y = self.model.hyper_synthesis(z_hat, y.shape[2:]).data
            sigma_x = self.model.synthesis(y_hat, x.shape[2:]).data
        zb = encode(z_hat[0].reshape(-1), self.ztables, self._z_indexes(z_hat.shape[1:]))
        yb = encode(y_hat[0].reshape(-1), self.gtables, scale_index(sigma_y[0]).reshape(-1))
        xb = encode(x[0][:, mask].reshape(-1), self.gtables, scale_index(sigma_x[0][:, mask]).reshape(-1))
        return zb, yb, xb

    def decode(self, segments, padded: tuple[int, int], mask: np.ndarray) -> np.ndarray:
        cfg = self.model.config
        (yh, yw), (zh, zw) = _latent_shapes(padded)
        m, n, c = cfg.hyper_channels, cfg.latent_channels, cfg.in_channels
        zb, yb, xb = segments
        z_hat = decode(zb, self.ztables, self._z_indexes((m, zh, zw))).reshape(1, m, zh, zw).astype(np.float64)
        with no_grad():
            sigma_y = self.model.hyper_synthesis(z_hat, (yh, yw)).data
        y_hat = decode(yb, self.gtables, scale_index(sigma_y[0]).reshape(-1)).reshape(1, n, yh, yw)
        with no_grad():
            sigma_x = self.model.synthesis(y_hat.astype(np.float64), padded).data
        x = np.zeros((c,) + tuple(padded))
        x[:, mask] = decode(xb, self.gtables, scale_index(sigma_x[0][:, mask]).reshape(-1)).reshape(c, -1)
        return x


def _coders(model: CodecModel, model_hash: bytes):
    """Per-model coders; rebuilt whenever the parameters (hence the hash) change."""
    cached = getattr(model, "_group_coders", None)
    if cached is None or cached[0] != model_hash:
        cached = (model_hash, _GroupCoder(model.luma), _GroupCoder(model.chroma))
        model._group_coders = cached
    return cached[1:]


def compress_image(image: JpegImage, model: CodecModel, tables: LearnedTables | None = None) -> JrcContainer:
    """Code an already parsed image. ``tables=None`` selects lossless mode."""
    mode = "lossless" if tables is None else "lossy"
    if tables is None:
        tables = lossless_mode_tables(image)
    batch, xl, xc = quantize_symbols(image, tables, model.config.pad_multiple)
    model_hash = model.model_hash()
    luma_coder, chroma_coder = _coders(model, model_hash)
    segs = luma_coder.encode(xl, batch.luma_mask) + chroma_coder.encode(xc, batch.chroma_mask)
    dl, dc = tables.decoder_tables()
    grids = (batch.luma_grid, batch.chroma_grid, batch.chroma_grid)
    return JrcContainer(mode, image.width, image.height, grids, (dl.serialized(), dc.serialized()),
                        model_hash, segs)


def decompress_image(container: JrcContainer, model: CodecModel) -> JpegImage:
    model_hash = model.model_hash()
    if container.model_hash != model_hash:
        raise ModelMismatch("container was produced with a different model")
    lgrid, cgrid, crgrid = container.grids
    if cgrid != crgrid:
        raise ContainerError("Cb and Cr grids differ")
    lpad, lmask = pad_and_mask(lgrid, model.config.pad_multiple)
    cpad, cmask = pad_and_mask(cgrid, model.config.pad_multiple)
    luma_coder, chroma_coder = _coders(model, model_hash)
    xl = luma_coder.decode(container.segments[:3], lpad, lmask)
    xc = chroma_coder.decode(container.segments[3:], cpad, cmask)
    luma_qt = QuantTable(container.inverse_tables[0])
    chroma_qt = QuantTable(container.inverse_tables[1])
    try:
        return JpegImage(
            container.width, container.height,
            CoeffPlane(channels_to_plane(xl, lgrid), "luma"),
            CoeffPlane(channels_to_plane(xc[:64], cgrid), "cb"),
            CoeffPlane(channels_to_plane(xc[64:], cgrid), "cr"),
            luma_qt, chroma_qt,
        )
    except ValueError as exc:
        raise ContainerError(f"container is inconsistent: {exc}") from exc


def compress(jpeg_bytes: bytes, model: CodecModel, tables: LearnedTables | None = None) -> bytes:
    return compress_image(parse_jpeg(jpeg_bytes), model, tables).to_bytes()


def decompress(container_bytes: bytes, model: CodecModel) -> bytes:
    return serialize_jpeg(decompress_image(JrcContainer.from_bytes(container_bytes), model))

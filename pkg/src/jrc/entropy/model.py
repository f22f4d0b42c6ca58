"""Hyperprior entropy model over DCT coefficient planes."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field

import numpy as np

from ..nn import (
    Parameter,
    Tensor,
    add_uniform_noise,
    as_tensor,
    bound,
    conv2d,
    conv_transpose2d,
    decode_params,
    encode_params,
    relu,
    relu6,
    ste_round,
)
from .likelihood import LOG_SIGMA_MAX, LOG_SIGMA_MIN, discretized_gaussian_likelihood
from .prior import FactorizedPrior

# (kind, kernel, stride, activation); channel counts are filled in from the config.
GA_LAYERS = (("conv", 5, 2, "relu"), ("conv", 5, 2, "relu6"), ("conv", 5, 2, "relu6"), ("conv", 5, 2, None))
GS_LAYERS = (
    ("conv", 3, 1, "relu"), ("conv", 3, 1, "relu"), ("conv", 3, 1, None),
    ("convT", 4, 2, "relu"), ("convT", 4, 2, "relu"), ("convT", 4, 4, None),
)
HA_LAYERS = (("conv", 3, 1, "relu"), ("conv", 5, 2, "relu"), ("conv", 5, 2, None))
HS_LAYERS = (("convT", 4, 2, "relu"), ("convT", 4, 2, "relu"), ("convT", 3, 1, None))

GA_FACTOR = 16
HA_FACTOR = 4


@dataclass(frozen=True)
class ModelConfig:
    in_channels: int = 64
    latent_channels: int = 128
    hyper_channels: int = 64
    norm: float = 64.0
    seed: int = 0


class _Stack:
    def __init__(self, layers, channels, rng):
        self.layers = []
        for (kind, k, s, act), cin, cout in zip(layers, channels[:-1], channels[1:]):
            fan_in = cin * k * k
            limit = 1.0 / np.sqrt(fan_in)
            shape = (cout, cin, k, k) if kind == "conv" else (cin, cout, k, k)
            w = Parameter(rng.uniform(-limit, limit, size=shape))
            b = Parameter(np.zeros(cout))
            self.layers.append((kind, s, act, w, b))

    def __call__(self, x: Tensor) -> Tensor:
        for kind, s, act, w, b in self.layers:
            x = conv2d(x, w, b, stride=s) if kind == "conv" else conv_transpose2d(x, w, b, stride=s)
            if act == "relu":
                x = relu(x)
            elif act == "relu6":
                x = relu6(x)
        return x

    def named_parameters(self, prefix):
        out = {}
        for i, (_, _, _, w, b) in enumerate(self.layers):
            out[f"{prefix}.{i}.weight"] = w
            out[f"{prefix}.{i}.bias"] = b
        return out


def sigma_from_logits(s: Tensor) -> Tensor:
    """sigma = exp(s) with s limited to [ln 0.04, ln 256]."""
    return bound(s, LOG_SIGMA_MIN, LOG_SIGMA_MAX).exp()


@dataclass
class RateReport:
    """Expected code lengths in bits. ``bits_*`` are scalar tensors so the total stays differentiable."""

    bits_x: Tensor
    bits_y: Tensor
    bits_z: Tensor
    pixel_count: int
    extras: dict = field(default_factory=dict)

    @property
    def total(self) -> Tensor:
        return self.bits_x + self.bits_y + self.bits_z

    @property
    def total_bits(self) -> float:
        return float(self.total.data)

    @property
    def bpp(self) -> float:
        return self.total_bits / self.pixel_count

    def __add__(self, other: "RateReport") -> "RateReport":
        """Bits of two plane groups of the same images."""
        if self.pixel_count != other.pixel_count:
            raise ValueError("rate reports cover different pixel counts")
        return RateReport(self.bits_x + other.bits_x, self.bits_y + other.bits_y,
                          self.bits_z + other.bits_z, self.pixel_count)


class HyperpriorModel:
    """G_a, G_s, H_a, H_s and the factorized prior for one coefficient plane group."""

    def __init__(self, config: ModelConfig = ModelConfig()):
        self.config = config
        rng = np.random.default_rng(config.seed)
        c, n, m = config.in_channels, config.latent_channels, config.hyper_channels
        self.ga = _Stack(GA_LAYERS, [c, n, n, n, n], rng)
        self.gs = _Stack(GS_LAYERS, [n, n, n, n, n, n, c], rng)
        self.ha = _Stack(HA_LAYERS, [n, n, n, m], rng)
        self.hs = _Stack(HS_LAYERS, [m, n, n, n], rng)
        self.prior = FactorizedPrior(m, rng=rng)

    # -- transforms -------------------------------------------------------------
    def _check(self, x: Tensor, channels: int, what: str):
        if x.ndim != 4 or x.shape[1] != channels:
            raise ValueError(f"{what}: expected (B, {channels}, H, W), got {x.shape}")

    def analysis(self, x) -> Tensor:
        x = as_tensor(x)
        self._check(x, self.config.in_channels, "analysis")
        return self.ga(x * (1.0 / self.config.norm))

    def hyper_analysis(self, y) -> Tensor:
        y = as_tensor(y)
        self._check(y, self.config.latent_channels, "hyper_analysis")
        return self.ha(y)

    def hyper_synthesis(self, z_hat, size=None) -> Tensor:
        """sigma for y-hat, cropped to ``size`` (defaults to 4x the input)."""
        z_hat = as_tensor(z_hat)
        self._check(z_hat, self.config.hyper_channels, "hyper_synthesis")
        s = self.hs(z_hat)
        if size is not None:
            s = s[:, :, :size[0], :size[1]]
        return sigma_from_logits(s)

    def synthesis(self, y_hat, size=None) -> Tensor:
        """sigma for x, cropped to ``size`` (defaults to 16x the input)."""
        y_hat = as_tensor(y_hat)
        self._check(y_hat, self.config.latent_channels, "synthesis")
        s = self.gs(y_hat)
        if size is not None:
            s = s[:, :, :size[0], :size[1]]
        return sigma_from_logits(s)

    # -- rate -----------------------------------------------------------------
    def rate(self, x, relaxation: str = "noise", rng=None, mask=None, pixel_count: int | None = None) -> RateReport:
        """Expected bits of x, y-hat and z-hat.

        ``relaxation`` is "noise" (additive uniform noise on the latents, for
        training) or "round" (hard rounding, matching what is coded). ``mask``
        broadcasts against x and selects the symbols that are actually coded.
        """
        x = as_tensor(x)
        y = self.analysis(x)
        z = self.hyper_analysis(y)
        if relaxation == "noise":
            if rng is None:
                raise ValueError("noise relaxation needs an rng")
            z_t = add_uniform_noise(z, rng)
            y_t = add_uniform_noise(y, rng)
        elif relaxation == "round":
            z_t, y_t = ste_round(z), ste_round(y)
        else:
            raise ValueError(f"unknown relaxation {relaxation!r}")
        sigma_y = self.hyper_synthesis(z_t, y.shape[2:])
        sigma_x = self.synthesis(y_t, x.shape[2:])
        log_px = discretized_gaussian_likelihood(x, sigma_x).log2()
        if mask is not None:
            log_px = log_px * Tensor(np.asarray(mask, dtype=np.float64))
        bits_x = -log_px.sum()
        bits_y = -discretized_gaussian_likelihood(y_t, sigma_y).log2().sum()
        bits_z = -self.prior.likelihood(z_t).log2().sum()
        if pixel_count is None:
            pixel_count = x.shape[0] * x.shape[2] * x.shape[3] * 64
        return RateReport(bits_x, bits_y, bits_z, pixel_count)

    # -- parameters -------------------------------------------------------------
    def named_parameters(self) -> dict[str, Parameter]:
        out = {}
        out.update(self.ga.named_parameters("ga"))
        out.update(self.gs.named_parameters("gs"))
        out.update(self.ha.named_parameters("ha"))
        out.update(self.hs.named_parameters("hs"))
        out.update(self.prior.named_parameters("prior"))
        return out

    def parameters(self) -> list[Parameter]:
        return list(self.named_parameters().values())

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        params = self.named_parameters()
        if set(arrays) != set(params):
            missing = sorted(set(params) - set(arrays))
            extra = sorted(set(arrays) - set(params))
            raise ValueError(f"parameter mismatch: missing {missing[:3]}, unexpected {extra[:3]}")
        for k, p in params.items():
            if arrays[k].shape != p.shape:
                raise ValueError(f"{k}: shape {arrays[k].shape} != {p.shape}")
            p.data = np.array(arrays[k], dtype=np.float64)


@dataclass(frozen=True)
class CodecConfig:
    """Channel plan for the luma and chroma models plus the padding multiple (in blocks)."""

    latent_channels: int = 128
    hyper_channels: int = 64
    norm: float = 64.0
    pad_multiple: int = 64
    seed: int = 0

    def luma_config(self) -> ModelConfig:
        return ModelConfig(64, self.latent_channels, self.hyper_channels, self.norm, self.seed)

    def chroma_config(self) -> ModelConfig:
        return ModelConfig(128, self.latent_channels, self.hyper_channels, self.norm, self.seed + 1)


class CodecModel:
    """Two independent hyperprior models: luma (64 channels) and chroma (Cb and Cr, 128 channels)."""

    def __init__(self, config: CodecConfig = CodecConfig()):
        if config.pad_multiple < 1 or config.pad_multiple % GA_FACTOR:
            raise ValueError("pad_multiple must be a positive multiple of 16 blocks")
        self.config = config
        self.luma = HyperpriorModel(config.luma_config())
        self.chroma = HyperpriorModel(config.chroma_config())

    def named_parameters(self) -> dict[str, Parameter]:
        out = {f"luma.{k}": v for k, v in self.luma.named_parameters().items()}
        out.update({f"chroma.{k}": v for k, v in self.chroma.named_parameters().items()})
        return out

    def parameters(self) -> list[Parameter]:
        return list(self.named_parameters().values())

    def to_bytes(self) -> bytes:
        arrays = {k: p.data for k, p in self.named_parameters().items()}
        return encode_params(arrays, {"model": asdict(self.config)})

    @classmethod
    def from_bytes(cls, blob: bytes) -> "CodecModel":
        config, arrays = decode_params(blob)
        model = cls(CodecConfig(**config["model"]))
        model.load_arrays(arrays)
        return model

    def load_arrays(self, arrays):
        self.luma.load_arrays({k[5:]: v for k, v in arrays.items() if k.startswith("luma.")})
        self.chroma.load_arrays({k[7:]: v for k, v in arrays.items() if k.startswith("chroma.")})

    def model_hash(self) -> bytes:
        return hashlib.sha256(self.to_bytes()).digest()

"""Per-channel learned univariate density for the hyper-latent."""

from __future__ import annotations

import numpy as np

from ..nn import Parameter, Tensor, as_tensor, channel_matmul, lower_bound, no_grad
from ..nn.tensor import _sigmoid
from .likelihood import LIKELIHOOD_FLOOR


class FactorizedPrior:
    """Monotone per-channel CDF c(v) = sigmoid(f(v)).

    f is a small stack of affine maps with positive (softplus) matrices and
    tanh-gated nonlinearities, so it is non-decreasing in v for every channel.
    """

    def __init__(self, channels: int, filters=(3, 3, 3), init_scale: float = 10.0, rng=None):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.channels = channels
        self.filters = tuple(filters)
        dims = (1,) + self.filters + (1,)
        scale = init_scale ** (1.0 / (len(self.filters) + 1))
        self.matrices, self.biases, self.factors = [], [], []
        for i in range(len(dims) - 1):
            init = np.log(np.expm1(1.0 / scale / dims[i + 1]))
            self.matrices.append(Parameter(np.full((channels, dims[i + 1], dims[i]), init)))
            self.biases.append(Parameter(rng.uniform(-0.5, 0.5, size=(channels, dims[i + 1], 1))))
            if i < len(dims) - 2:
                self.factors.append(Parameter(np.zeros((channels, dims[i + 1], 1))))

    def named_parameters(self, prefix: str = "prior"):
        out = {}
        for i, m in enumerate(self.matrices):
            out[f"{prefix}.matrix{i}"] = m
            out[f"{prefix}.bias{i}"] = self.biases[i]
        for i, f in enumerate(self.factors):
            out[f"{prefix}.factor{i}"] = f
        return out

    def _logits(self, v: Tensor) -> Tensor:
        """v: (C, 1, L) -> cumulative logits (C, 1, L)."""
        logits = v
        for i, m in enumerate(self.matrices):
            logits = channel_matmul(m.softplus(), logits) + self.biases[i]
            if i < len(self.factors):
                logits = logits + self.factors[i].tanh() * logits.tanh()
        return logits

    def _to_rows(self, v: Tensor) -> tuple[Tensor, tuple]:
        v = as_tensor(v)
        b, c, h, w = v.shape
        if c != self.channels:
            raise ValueError(f"prior expects {self.channels} channels, got {c}")
        return v.transpose(1, 0, 2, 3).reshape(c, 1, b * h * w), (b, c, h, w)

    def likelihood(self, v) -> Tensor:
        """P(v) = c(v + 1/2) - c(v - 1/2), floored at 2^-16; v shaped (B, C, H, W)."""
        rows, (b, c, h, w) = self._to_rows(v)
        lower = self._logits(rows - 0.5)
        upper = self._logits(rows + 0.5)
        # evaluate on the side of the median where the sigmoid is not saturated
        sign = -np.sign(lower.data + upper.data)
        sign[sign == 0] = 1.0
        p = ((upper * sign).sigmoid() - (lower * sign).sigmoid()).abs()
        p = lower_bound(p, LIKELIHOOD_FLOOR)
        return p.reshape(c, b, h, w).transpose(1, 0, 2, 3)

    def cdf(self, values: np.ndarray) -> np.ndarray:
        """c(v) for every channel on a shared 1-D grid: returns (C, len(values))."""
        with no_grad():
            grid = np.broadcast_to(np.asarray(values, dtype=np.float64), (self.channels, 1, len(values)))
            return self._logits(Tensor(grid)).sigmoid().data[:, 0, :]

    def pmf_table(self, lo: int, hi: int, floor: bool = True) -> np.ndarray:
        """Per-channel probabilities of every integer in [lo, hi]: (C, hi - lo + 1)."""
        with no_grad():
            v = np.arange(lo, hi + 1, dtype=np.float64)
            rows = np.broadcast_to(v, (self.channels, 1, len(v)))
            lower = self._logits(Tensor(rows - 0.5)).data
            upper = self._logits(Tensor(rows + 0.5)).data
        sign = -np.sign(lower + upper)
        sign[sign == 0] = 1.0
        p = np.abs(_sigmoid(sign * upper) - _sigmoid(sign * lower))[:, 0, :]
        return np.maximum(p, LIKELIHOOD_FLOOR) if floor else p

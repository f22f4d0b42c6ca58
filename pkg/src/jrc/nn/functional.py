"""Differentiable operations used by the entropy model and the losses."""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import as_strided
from scipy.special import erfc

from .tensor import Tensor, as_tensor

# --------------------------------------------------------------------------- #
# convolution


def _ceil_padding(size: int, k: int, stride: int) -> tuple[int, int, int]:
    out = -(-size // stride)
    total = max((out - 1) * stride + k - size, 0)
    return out, total // 2, total - total // 2


def _im2col(xp: np.ndarray, k: int, stride: int, ho: int, wo: int) -> np.ndarray:
    """Channels-last (Hp, Wp, B, C) -> (ho*wo*B, k*k*C) patch rows."""
    sh, sw, sb, sc = xp.strides
    b, c = xp.shape[2:]
    patches = as_strided(
        xp,
        shape=(ho, wo, b, k, k, c),
        strides=(sh * stride, sw * stride, sb, sh, sw, sc),
        writeable=False,
    )
    return patches.reshape(ho * wo * b, k * k * c)


def _col2im(cols: np.ndarray, shape: tuple, k: int, stride: int, ho: int, wo: int) -> np.ndarray:
    """Adjoint of _im2col: scatter-add (ho*wo*B, k*k*C) rows into a (Hp, Wp, B, C) array."""
    hp, wp, b, c = shape
    cols = cols.reshape(ho, wo, b, k, k, c)
    out = np.zeros(shape)
    hspan, wspan = stride * (ho - 1) + 1, stride * (wo - 1) + 1
    for i in range(k):
        for j in range(k):
            out[i:i + hspan:stride, j:j + wspan:stride] += cols[:, :, :, i, j]
    return out


def _nhwc(a: np.ndarray) -> np.ndarray:
    return a.transpose(2, 3, 0, 1)


def _nchw(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a.transpose(2, 3, 0, 1))


def conv2d(x: Tensor, weight: Tensor, bias: Tensor | None = None, stride: int = 1) -> Tensor:
    """Cross-correlation with zero "ceil" padding: output size is ceil(in / stride).

    weight: (out_channels, in_channels, k, k).
    """
    b, c, h, w = x.shape
    o, ci, k, k2 = weight.shape
    if ci != c or k != k2:
        raise ValueError(f"conv2d: input has {c} channels, weight expects {ci} (kernel {k}x{k2})")
    ho, pt, pb = _ceil_padding(h, k, stride)
    wo, pl, pr = _ceil_padding(w, k, stride)
    xp = np.zeros((h + pt + pb, w + pl + pr, b, c))
    xp[pt:pt + h, pl:pl + w] = _nhwc(x.data)
    cols = _im2col(xp, k, stride, ho, wo)
    wmat = weight.data.transpose(0, 2, 3, 1).reshape(o, -1)
    out = cols @ wmat.T
    if bias is not None:
        out += bias.data
    out = _nchw(out.reshape(ho, wo, b, o))
    parents = (x, weight) if bias is None else (x, weight, bias)

    def backward(g):
        g2 = np.ascontiguousarray(_nhwc(g)).reshape(-1, o)
        gx = gw = None
        if x.requires_grad:
            gxp = _col2im(g2 @ wmat, xp.shape, k, stride, ho, wo)
            gx = _nchw(gxp[pt:pt + h, pl:pl + w])
        if weight.requires_grad:
            gw = (g2.T @ cols).reshape(o, k, k, c).transpose(0, 3, 1, 2)
        if bias is None:
            return gx, gw
        return gx, gw, g.sum(axis=(0, 2, 3))

    return Tensor.from_op(out, parents, backward)


def conv_transpose2d(x: Tensor, weight: Tensor, bias: Tensor | None = None, stride: int = 1) -> Tensor:
    """Transposed convolution; output spatial size is exactly in * stride.

    weight: (in_channels, out_channels, k, k). This is the adjoint of
    ``conv2d`` with the same weight on inputs whose size divides by stride.
    """
    b, c, h, w = x.shape
    ci, o, k, k2 = weight.shape
    if ci != c or k != k2:
        raise ValueError(f"conv_transpose2d: input has {c} channels, weight expects {ci}")
    if k < stride:
        raise ValueError("conv_transpose2d needs kernel >= stride")
    crop = (k - stride) // 2
    full_shape = ((h - 1) * stride + k, (w - 1) * stride + k, b, o)
    xmat = np.ascontiguousarray(_nhwc(x.data)).reshape(-1, c)
    wmat = weight.data.transpose(0, 2, 3, 1).reshape(c, -1)
    full = _col2im(xmat @ wmat, full_shape, k, stride, h, w)
    out = full[crop:crop + h * stride, crop:crop + w * stride]
    if bias is not None:
        out = out + bias.data
    out = _nchw(out)
    parents = (x, weight) if bias is None else (x, weight, bias)

    def backward(g):
        gfull = np.zeros(full_shape)
        gfull[crop:crop + h * stride, crop:crop + w * stride] = _nhwc(g)
        cols = _im2col(gfull, k, stride, h, w)
        gx = gw = None
        if x.requires_grad:
            gx = _nchw((cols @ wmat.T).reshape(h, w, b, c))
        if weight.requires_grad:
            gw = (xmat.T @ cols).reshape(c, k, k, o).transpose(0, 3, 1, 2)
        if bias is None:
            return gx, gw
        return gx, gw, g.sum(axis=(0, 2, 3))

    return Tensor.from_op(out, parents, backward)


# --------------------------------------------------------------------------- #
# activations and quantization proxies


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return Tensor.from_op(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


def relu6(x: Tensor) -> Tensor:
    mask = (x.data > 0) & (x.data < 6)
    return Tensor.from_op(np.clip(x.data, 0.0, 6.0), (x,), lambda g: (g * mask,))


def round_half_away(values: np.ndarray) -> np.ndarray:
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def ste_round(x: Tensor) -> Tensor:
    """Round half away from zero; the gradient passes through unchanged."""
    return Tensor.from_op(round_half_away(x.data), (x,), lambda g: (g,))


def add_uniform_noise(x: Tensor, rng: np.random.Generator) -> Tensor:
    """x + U(-0.5, 0.5) noise with identity gradient."""
    noise = rng.uniform(-0.5, 0.5, size=x.shape)
    return Tensor.from_op(x.data + noise, (x,), lambda g: (g,))


def lower_bound(x: Tensor, bound: float) -> Tensor:
    """max(x, bound). Below the bound the gradient still flows when it points upward."""
    data = x.data
    below = data < bound

    def backward(g):
        return (np.where(below & (g > 0), 0.0, g),)

    return Tensor.from_op(np.maximum(data, bound), (x,), backward)


def bound(x: Tensor, lo: float, hi: float) -> Tensor:
    """clip(x, lo, hi) whose gradient survives when it would move x back inside."""
    data = x.data
    below, above = data < lo, data > hi

    def backward(g):
        blocked = (below & (g > 0)) | (above & (g < 0))
        return (np.where(blocked, 0.0, g),)

    return Tensor.from_op(np.clip(data, lo, hi), (x,), backward)


def clamp(x: Tensor, lo: float, hi: float) -> Tensor:
    mask = (x.data >= lo) & (x.data <= hi)
    return Tensor.from_op(np.clip(x.data, lo, hi), (x,), lambda g: (g * mask,))


_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def normal_cdf_array(t: np.ndarray) -> np.ndarray:
    return 0.5 * erfc(-t * _INV_SQRT2)


def normal_cdf(x: Tensor) -> Tensor:
    t = x.data
    return Tensor.from_op(
        normal_cdf_array(t), (x,), lambda g: (g * _INV_SQRT_2PI * np.exp(-0.5 * t * t),)
    )


# --------------------------------------------------------------------------- #
# structural helpers


def upsample_nearest(x: Tensor, factor: int) -> Tensor:
    """Replicate each spatial sample into a factor x factor square."""
    b, c, h, w = x.shape
    out = np.repeat(np.repeat(x.data, factor, axis=2), factor, axis=3)

    def backward(g):
        return (g.reshape(b, c, h, factor, w, factor).sum(axis=(3, 5)),)

    return Tensor.from_op(out, (x,), backward)


def depth_to_space(x: Tensor, block: int) -> Tensor:
    """(B, block*block, H, W) with row-major in-block channel order -> (B, 1, H*block, W*block)."""
    b, c, h, w = x.shape
    if c != block * block:
        raise ValueError(f"depth_to_space needs {block * block} channels, got {c}")
    return (
        x.reshape(b, block, block, h, w)
        .transpose(0, 3, 1, 4, 2)
        .reshape(b, 1, h * block, w * block)
    )


def channel_matmul(weight: Tensor, x: Tensor) -> Tensor:
    """Batched matmul over a leading channel axis: (C, o, i) @ (C, i, L) -> (C, o, L)."""
    wd, xd = weight.data, x.data

    def backward(g):
        gw = g @ xd.transpose(0, 2, 1) if weight.requires_grad else None
        gx = wd.transpose(0, 2, 1) @ g if x.requires_grad else None
        return gw, gx

    return Tensor.from_op(wd @ xd, (weight, x), backward)


def concat(tensors, axis: int) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=axis))

    return Tensor.from_op(np.concatenate([t.data for t in tensors], axis=axis), tensors, backward)

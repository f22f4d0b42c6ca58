"""Minimal float64 autodiff, convolution layers and Adam."""

from .checkpoint import CheckpointError, content_hash, decode_params, encode_params
from .functional import (
    add_uniform_noise,
    bound,
    channel_matmul,
    clamp,
    concat,
    conv2d,
    conv_transpose2d,
    depth_to_space,
    lower_bound,
    normal_cdf,
    relu,
    relu6,
    ste_round,
    upsample_nearest,
)
from .optim import AdamConfig, adam_step, lr_decay, reset_moments, zero_grad
from .random import step_rng
from .tensor import Parameter, Tensor, as_tensor, no_grad

__all__ = [
    "AdamConfig", "CheckpointError", "Parameter", "Tensor", "adam_step", "add_uniform_noise",
    "as_tensor", "bound", "channel_matmul", "clamp", "concat", "content_hash", "conv2d",
    "conv_transpose2d", "decode_params", "depth_to_space", "encode_params", "lower_bound",
    "lr_decay", "no_grad", "normal_cdf", "relu", "relu6", "reset_moments", "step_rng",
    "ste_round", "upsample_nearest", "zero_grad",
]

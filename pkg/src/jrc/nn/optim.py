from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Parameter


@dataclass(frozen=True)
class AdamConfig:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError("learning rate must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


def adam_step(params, config: AdamConfig) -> None:
    """One bias-corrected Adam update; gradients are cleared afterwards.

    Every parameter must carry a gradient.
    """
    params = list(params)
    for p in params:
        if p.grad is None:
            raise ValueError(f"adam_step: {p!r} has no gradient")
    b1, b2 = config.beta1, config.beta2
    for p in params:
        g = p.grad
        p.step_count += 1
        p.adam_m = b1 * p.adam_m + (1.0 - b1) * g
        p.adam_v = b2 * p.adam_v + (1.0 - b2) * g * g
        m_hat = p.adam_m / (1.0 - b1 ** p.step_count)
        v_hat = p.adam_v / (1.0 - b2 ** p.step_count)
        p.data = p.data - config.lr * m_hat / (np.sqrt(v_hat) + config.epsilon)
        p.grad = None


def zero_grad(params) -> None:
    for p in params:
        p.grad = None


def lr_decay(initial_lr: float, gamma: float, interval: int, epoch: int) -> float:
    """Step decay: initial * gamma ** floor(epoch / interval)."""
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    if interval < 1:
        raise ValueError("decay interval must be at least one epoch")
    return initial_lr * gamma ** (epoch // interval)


def reset_moments(params: list[Parameter]) -> None:
    for p in params:
        p.adam_m = np.zeros_like(p.data)
        p.adam_v = np.zeros_like(p.data)
        p.step_count = 0

"""Discretized zero-mean Gaussian likelihoods, as tensors and as plain arrays."""

from __future__ import annotations

import math

import numpy as np

from ..nn import Tensor, as_tensor, lower_bound, normal_cdf
from ..nn.functional import normal_cdf_array

LIKELIHOOD_FLOOR = 2.0 ** -16
SIGMA_MIN = 0.04
SIGMA_MAX = 256.0
LOG_SIGMA_MIN = math.log(SIGMA_MIN)
LOG_SIGMA_MAX = math.log(SIGMA_MAX)


def gaussian_mass(v: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Unfloored P(v) = Phi((v+.5)/s) - Phi((v-.5)/s), computed on the left tail for accuracy."""
    a = np.abs(v)
    return normal_cdf_array((0.5 - a) / sigma) - normal_cdf_array((-0.5 - a) / sigma)


def gaussian_likelihood_array(v, sigma) -> np.ndarray:
    return np.maximum(gaussian_mass(np.asarray(v, dtype=np.float64), np.asarray(sigma, dtype=np.float64)),
                      LIKELIHOOD_FLOOR)


def discretized_gaussian_likelihood(v, sigma: Tensor) -> Tensor:
    """Per-element probability of integer (or noisy) ``v`` under N(0, sigma^2), floored at 2^-16."""
    a = as_tensor(v).abs()
    sigma = as_tensor(sigma)
    upper = normal_cdf((0.5 - a) / sigma)
    lower = normal_cdf((-0.5 - a) / sigma)
    return lower_bound(upper - lower, LIKELIHOOD_FLOOR)

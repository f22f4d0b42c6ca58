"""Hyperprior entropy model: transforms, likelihoods and the rate functional."""

from .likelihood import (
    LIKELIHOOD_FLOOR,
    SIGMA_MAX,
    SIGMA_MIN,
    discretized_gaussian_likelihood,
    gaussian_likelihood_array,
    gaussian_mass,
)
from .model import CodecConfig, CodecModel, HyperpriorModel, ModelConfig, RateReport, sigma_from_logits
from .prior import FactorizedPrior

__all__ = [
    "CodecConfig", "CodecModel", "FactorizedPrior", "HyperpriorModel", "LIKELIHOOD_FLOOR",
    "ModelConfig", "RateReport", "SIGMA_MAX", "SIGMA_MIN", "discretized_gaussian_likelihood",
    "gaussian_likelihood_array", "gaussian_mass", "sigma_from_logits",
]

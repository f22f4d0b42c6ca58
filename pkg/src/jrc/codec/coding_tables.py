"""Integer CDF tables shared by encoder and decoder.

Gaussian tables are built once for a fixed ladder of scale levels; the coder
picks the level nearest to each predicted sigma in log space. Prior tables
come straight from the factorized density, one per hyper-latent channel.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from ..entropy import LIKELIHOOD_FLOOR, SIGMA_MAX, SIGMA_MIN, FactorizedPrior
from ..entropy.likelihood import gaussian_likelihood_array, gaussian_mass
from ..rangecoder import CdfTable, quantize_cdf

SCALE_LEVELS = 256
# Escape slot frequency (of 65536). An escape costs 16 - log2(ESCAPE_FREQ) bits
# plus the gamma suffix, against the flat 16 bits the floored likelihood reports;
# 64 keeps the two close for about 0.0014 bits on every in-support symbol.
ESCAPE_FREQ = 64
_LOG_MIN = math.log(SIGMA_MIN)
_LOG_STEP = (math.log(SIGMA_MAX) - _LOG_MIN) / (SCALE_LEVELS - 1)
PRIOR_SEARCH = 512


def scale_ladder() -> np.ndarray:
    return np.exp(_LOG_MIN + _LOG_STEP * np.arange(SCALE_LEVELS))


def gaussian_support(sigma: float) -> int:
    """Largest |v| whose unfloored mass is still >= 2^-16 (at least 1)."""
    k = int(math.ceil(sigma * 8)) + 2
    v = np.arange(k + 1)
    ok = np.nonzero(gaussian_mass(v, sigma) >= LIKELIHOOD_FLOOR)[0]
    return max(int(ok[-1]) if ok.size else 0, 1)


@functools.lru_cache(maxsize=1)
def gaussian_tables() -> tuple[CdfTable, ...]:
    tables = []
    for sigma in scale_ladder():
        k = gaussian_support(float(sigma))
        v = np.arange(-k, k + 1)
        tables.append(quantize_cdf(gaussian_likelihood_array(v, sigma), lo=-k, escape=ESCAPE_FREQ))
    return tuple(tables)


def scale_index(sigma: np.ndarray) -> np.ndarray:
    """Nearest ladder level for every sigma."""
    idx = np.floor((np.log(np.asarray(sigma, dtype=np.float64)) - _LOG_MIN) / _LOG_STEP + 0.5)
    return np.clip(idx, 0, SCALE_LEVELS - 1).astype(np.int64)


def prior_tables(prior: FactorizedPrior) -> list[CdfTable]:
    """One table per channel, restricted to where the unfloored mass is >= 2^-16."""
    lo, hi = -PRIOR_SEARCH, PRIOR_SEARCH
    pmf = prior.pmf_table(lo, hi, floor=False)
    tables = []
    for row in pmf:
        ok = np.nonzero(row >= LIKELIHOOD_FLOOR)[0]
        if ok.size:
            a, b = int(ok[0]), int(ok[-1])
        else:
            a = b = int(np.argmax(row))
        a, b = min(a, -lo - 1), max(b, -lo + 1)  # always cover -1..1
        tables.append(quantize_cdf(np.maximum(row[a:b + 1], LIKELIHOOD_FLOOR), lo=lo + a, escape=ESCAPE_FREQ))
    return tables

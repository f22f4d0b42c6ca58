from __future__ import annotations

import numpy as np


def step_rng(seed: int, step: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator: the same (seed, step, stream) always yields the same draws."""
    bitgen = np.random.Philox(key=int(seed) & ((1 << 64) - 1), counter=[int(step), int(stream), 0, 0])
    return np.random.Generator(bitgen)

"""Learned quantization (Q_t) and inverse quantization (Q_t') tables."""

from __future__ import annotations

import numpy as np

from ..jpeg import QuantTable, standard_tables
from ..nn import Parameter, Tensor, clamp

STEP_MIN = 1.0
STEP_MAX = 255.0
NAMES = ("qt_luma", "qt_chroma", "qti_luma", "qti_chroma")


def softplus_inverse(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    return q + np.log(-np.expm1(-q))


class LearnedTables:
    """Four 64-entry tables in natural order: Q_t and Q_t' for luma and for chroma.

    Trainable tables are stored as softplus pre-activations and clamped to
    [1, 255]. Fixed tables (lossless mode, ablations) return their steps
    exactly, so x = I / Q_t is exact when Q_t is the file's own table.
    """

    def __init__(self, steps: dict[str, np.ndarray], trainable: bool = True):
        missing = [n for n in NAMES if n not in steps]
        if missing:
            raise ValueError(f"missing tables: {missing}")
        self.trainable = trainable
        self.params: dict[str, Parameter] = {}
        self.fixed: dict[str, np.ndarray] = {}
        for name in NAMES:
            values = np.asarray(steps[name], dtype=np.float64).reshape(64)
            if np.any(values <= 0) or not np.all(np.isfinite(values)):
                raise ValueError(f"{name}: steps must be finite and positive")
            if trainable:
                self.params[name] = Parameter(softplus_inverse(np.clip(values, STEP_MIN, STEP_MAX)))
            else:
                self.fixed[name] = values.copy()

    # -- construction ---------------------------------------------------------
    @classmethod
    def from_quant_tables(cls, luma: QuantTable, chroma: QuantTable, trainable: bool = True,
                          inverse: tuple[QuantTable, QuantTable] | None = None) -> "LearnedTables":
        inv_luma, inv_chroma = inverse if inverse is not None else (luma, chroma)
        return cls({
            "qt_luma": luma.natural, "qt_chroma": chroma.natural,
            "qti_luma": inv_luma.natural, "qti_chroma": inv_chroma.natural,
        }, trainable=trainable)

    @classmethod
    def standard(cls, quality: int = 75, trainable: bool = True) -> "LearnedTables":
        return cls.from_quant_tables(*standard_tables(quality), trainable=trainable)

    @classmethod
    def from_arrays(cls, arrays: dict[str, np.ndarray]) -> "LearnedTables":
        """Rebuild trainable tables from stored softplus pre-activations."""
        tables = cls({n: np.ones(64) for n in NAMES}, trainable=True)
        for n in NAMES:
            tables.params[n].data = np.array(arrays[n], dtype=np.float64).reshape(64)
        return tables

    # -- access ---------------------------------------------------------------
    def step(self, name: str) -> Tensor:
        """Effective steps as a (64,) tensor; differentiable for trainable tables."""
        if not self.trainable:
            return Tensor(self.fixed[name])
        return clamp(self.params[name].softplus(), STEP_MIN, STEP_MAX)

    def values(self, name: str) -> np.ndarray:
        return self.step(name).data.copy()

    def encoder_tables(self) -> tuple[QuantTable, QuantTable]:
        """Continuous Q_t used to quantize I (never stored in any file)."""
        return (QuantTable.from_natural(self.values("qt_luma")),
                QuantTable.from_natural(self.values("qt_chroma")))

    def decoder_tables(self) -> tuple[QuantTable, QuantTable]:
        """Q_t' rounded to integers in [1, 255], as emitted in the output JPEG."""
        return (QuantTable.from_natural(self.values("qti_luma")).rounded(),
                QuantTable.from_natural(self.values("qti_chroma")).rounded())

    def rounding_error(self) -> float:
        """Largest |continuous - serialized| step of Q_t'."""
        err = 0.0
        for name, table in zip(("qti_luma", "qti_chroma"), self.decoder_tables()):
            err = max(err, float(np.max(np.abs(self.values(name) - table.natural))))
        return err

    def named_parameters(self) -> dict[str, Parameter]:
        return {f"tables.{k}": v for k, v in self.params.items()}

    def parameters(self) -> list[Parameter]:
        return list(self.params.values())

    def frozen_copy(self) -> "LearnedTables":
        return LearnedTables({n: self.values(n) for n in NAMES}, trainable=False)

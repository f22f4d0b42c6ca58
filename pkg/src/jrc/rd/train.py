"""Two-stage training: the lossless model first, then alternating model / table finetuning."""

from __future__ import annotations

import configparser
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..entropy import CodecConfig, CodecModel
from ..grid import PlaneBatch, pack_images
from ..jpeg import parse_jpeg
from ..nn import (
    AdamConfig,
    Tensor,
    adam_step,
    conv2d,
    conv_transpose2d,
    decode_params,
    encode_params,
    lr_decay,
    no_grad,
    relu,
    relu6,
    reset_moments,
    step_rng,
)
from .losses import TradeoffPoint, loss_model, loss_rd, quantize
from .tables import NAMES, LearnedTables

log = logging.getLogger(__name__)

LAMBDA_GRID = (
    (0.1, 100), (0.2, 100), (0.4, 100), (0.6, 100), (0.8, 100), (1, 100), (2, 100), (4, 100),
    (8, 100), (16, 100), (32, 100), (48, 50), (64, 20), (64, 10), (64, 5),
)

# RNG streams under one seed
_STREAM_STAGE1, _STREAM_MODEL, _STREAM_TABLES = 1, 2, 3


def lambda_grid(override=None) -> list[TradeoffPoint]:
    pairs = LAMBDA_GRID if override is None else override
    return [TradeoffPoint(float(r), float(d)) for r, d in pairs]


class TrainingDiverged(RuntimeError):
    """A non-finite loss; ``state`` holds the last finite checkpoint."""

    def __init__(self, message: str, state: "TrainState"):
        super().__init__(message)
        self.state = state


@dataclass
class TrainConfig:
    corpus: str = ""
    lambda_r: float = 1.0
    lambda_d: float = 100.0
    seed: int = 0
    scale: int = 1
    batch_size: int = 16
    # model
    latent_channels: int = 128
    hyper_channels: int = 64
    norm: float = 64.0
    pad_multiple: int = 64
    data_init: bool = True
    # stage 1
    stage1_epochs: int = 2000
    stage1_lr: float = 1e-4
    stage1_gamma: float = 0.9
    stage1_interval: int = 500
    stage1_converge: bool = False
    stage1_max_epochs: int = 0
    convergence_tol: float = 1e-4
    convergence_window: int = 20
    # stage 2
    rounds: int = 8
    model_epochs: int = 50
    model_lr: float = 1e-3
    model_gamma: float = 0.94
    model_interval: int = 1
    table_epochs: int = 30
    table_lr: float = 5e-3
    table_gamma: float = 0.8
    table_interval: int = 1
    init_quality: int = 75
    learn_tables: bool = True
    domain: str = "rgb"

    def __post_init__(self):
        if self.scale < 1 or self.batch_size < 1 or self.rounds < 0:
            raise ValueError("scale and batch_size must be >= 1, rounds >= 0")
        if self.domain not in ("rgb", "ycc"):
            raise ValueError(f"unknown distortion domain {self.domain!r}")
        TradeoffPoint(self.lambda_r, self.lambda_d)

    @property
    def point(self) -> TradeoffPoint:
        return TradeoffPoint(self.lambda_r, self.lambda_d)

    def scaled(self, epochs: int) -> int:
        """Epoch counts and decay intervals are divided by ``scale`` (rounded up)."""
        return max(1, -(-int(epochs) // self.scale))

    def codec_config(self) -> CodecConfig:
        return CodecConfig(self.latent_channels, self.hyper_channels, self.norm, self.pad_multiple, self.seed)

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    # -- key/value file ---------------------------------------------------------
    @classmethod
    def from_file(cls, path, section: str = "train") -> "TrainConfig":
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise FileNotFoundError(path)
        return cls.from_mapping(dict(parser[section]))

    @classmethod
    def from_mapping(cls, values: dict) -> "TrainConfig":
        kinds = {f.name: f.type for f in dataclasses.fields(cls)}
        out = {}
        for key, raw in values.items():
            if key not in kinds:
                raise ValueError(f"unknown training option {key!r}")
            kind = kinds[key]
            if kind == "bool":
                out[key] = str(raw).strip().lower() in ("1", "true", "yes", "on")
            elif kind == "int":
                out[key] = int(raw)
            elif kind == "float":
                out[key] = float(raw)
            else:
                out[key] = str(raw)
        return cls(**out)

    def to_file(self, path, section: str = "train") -> None:
        parser = configparser.ConfigParser()
        parser[section] = {k: str(v) for k, v in dataclasses.asdict(self).items()}
        with open(path, "w") as fh:
            parser.write(fh)


@dataclass
class TrainState:
    model: CodecModel
    tables: LearnedTables
    config: TrainConfig
    stage1_epochs: int = 0
    round_index: int = 0
    history: list = field(default_factory=list)

    def to_bytes(self) -> bytes:
        arrays = {k: p.data for k, p in self.model.named_parameters().items()}
        if self.tables.trainable:
            arrays.update({k: p.data for k, p in self.tables.named_parameters().items()})
        else:
            arrays.update({f"tables.{n}": self.tables.values(n) for n in NAMES})
        meta = {
            "model": dataclasses.asdict(self.model.config),
            "train": dataclasses.asdict(self.config),
            "state": {"stage1_epochs": self.stage1_epochs, "round": self.round_index,
                      "tables_trainable": self.tables.trainable},
        }
        return encode_params(arrays, meta)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "TrainState":
        meta, arrays = decode_params(blob)
        model = CodecModel(CodecConfig(**meta["model"]))
        model.load_arrays(arrays)
        tabs = {n: arrays[f"tables.{n}"] for n in NAMES}
        state = meta.get("state", {})
        if state.get("tables_trainable", True):
            tables = LearnedTables.from_arrays(tabs)
        else:
            tables = LearnedTables(tabs, trainable=False)
        config = TrainConfig(**meta["train"]) if "train" in meta else TrainConfig()
        return cls(model, tables, config, state.get("stage1_epochs", 0), state.get("round", 0))

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "TrainState":
        return cls.from_bytes(Path(path).read_bytes())


def load_model(path) -> tuple[CodecModel, LearnedTables | None]:
    """Model and, when the checkpoint has them, its tables."""
    blob = Path(path).read_bytes()
    _, arrays = decode_params(blob)
    if all(f"tables.{n}" in arrays for n in NAMES):
        state = TrainState.from_bytes(blob)
        return state.model, state.tables
    return CodecModel.from_bytes(blob), None


def load_corpus(path, pad_multiple: int) -> PlaneBatch:
    files = sorted(Path(path).glob("*.jpg"))
    if not files:
        raise FileNotFoundError(f"no .jpg tiles in {path}")
    return pack_images([parse_jpeg(f.read_bytes()) for f in files], pad_multiple)


def initial_state(config: TrainConfig, batch: PlaneBatch) -> TrainState:
    model = CodecModel(config.codec_config())
    tables = LearnedTables.standard(config.init_quality, trainable=config.learn_tables)
    if config.data_init:
        init_from_data(model, tables, batch)
    return TrainState(model, tables, config)


def _apply(layer, x):
    kind, s, act, w, b = layer
    out = conv2d(x, w, b, stride=s) if kind == "conv" else conv_transpose2d(x, w, b, stride=s)
    return out, act


def _activate(x, act):
    return relu(x) if act == "relu" else relu6(x) if act == "relu6" else x


def _rescale_stack(stack, x: Tensor, last_std: float | None, mask=None) -> Tensor:
    """Scale each layer's weights so its pre-activations have unit std (``last_std`` for the last)."""
    n = len(stack.layers)
    for i, layer in enumerate(stack.layers):
        out, act = _apply(layer, x)
        target = 1.0 if i < n - 1 else last_std
        if target is not None:
            data = out.data if mask is None or i < n - 1 else out.data[:, :, mask]
            std = float(data.std())
            if std > 0:
                layer[3].data *= target / std
            out, act = _apply(layer, x)
        x = _activate(out, act)
    return x


def init_from_data(model: CodecModel, tables: LearnedTables, batch: PlaneBatch, latent_std: float = 2.0,
                   logit_std: float = 0.1) -> None:
    """Data-dependent start: unit-variance hidden layers, y spread over a few bins, flat sigma maps.

    The sigma heads start near a static per-channel Gaussian (RMS of the data);
    the latent paths start with activations well above the training noise.
    """
    with no_grad():
        xl, xc = quantize(batch, tables)
        for sub, x, mask in ((model.luma, xl, batch.luma_mask), (model.chroma, xc, batch.chroma_mask)):
            y = _rescale_stack(sub.ga, x * (1.0 / sub.config.norm), latent_std)
            z = _rescale_stack(sub.ha, y, latent_std)
            s_y = _rescale_stack(sub.hs, z, logit_std)
            sub.hs.layers[-1][4].data -= s_y.data.mean(axis=(0, 2, 3))
            sub.hs.layers[-1][4].data += np.log(np.sqrt((y.data ** 2).mean(axis=(0, 2, 3))) + 0.5)
            s_x = _rescale_stack(sub.gs, y, logit_std, mask)
            rms = np.sqrt((x.data[:, :, mask] ** 2).mean(axis=(0, 2)))
            sub.gs.layers[-1][4].data += np.log(np.clip(rms, 0.05, 250.0)) - s_x.data[:, :, mask].mean(axis=(0, 2))


# --------------------------------------------------------------------------- loops


def _check_finite(value: float, what: str, last_good: bytes):
    if not math.isfinite(value):
        raise TrainingDiverged(f"non-finite {what} loss", TrainState.from_bytes(last_good))


def _epoch(state: TrainState, batch: PlaneBatch, params, epoch: int, lr: float, stream: int,
           step_fn, what: str) -> float:
    """One pass over the corpus in a seeded order; returns the mean per-pixel loss."""
    c = state.config
    last_good = state.to_bytes()
    order = step_rng(c.seed, epoch, stream).permutation(batch.batch_size)
    adam = AdamConfig(lr=lr)
    total, pixels = 0.0, 0
    for i, start in enumerate(range(0, batch.batch_size, c.batch_size)):
        sub = batch.take(order[start:start + c.batch_size])
        loss = step_fn(sub, step_rng(c.seed, epoch * 100003 + i, stream))
        value = float(loss.data)
        _check_finite(value, what, last_good)
        loss.backward()
        adam_step(params, adam)
        total += value
        pixels += sub.pixel_count
    log.debug("%s epoch %d loss/px %.5f", what, epoch, total / pixels)
    return total / pixels


def _run_epochs(state, batch, params, epochs, lr, gamma, interval, stream, step_fn, what, start_epoch=0):
    """A phase: fresh Adam moments, lr decayed from the start of the phase."""
    reset_moments(params)
    return [_epoch(state, batch, params, start_epoch + e, lr_decay(lr, gamma, interval, e), stream, step_fn, what)
            for e in range(epochs)]


def _converged(losses: list, window: int, tol: float) -> bool:
    """Relative improvement of the last ``window`` epochs over the previous ones below ``tol``."""
    if len(losses) < 2 * window:
        return False
    old = float(np.mean(losses[-2 * window:-window]))
    new = float(np.mean(losses[-window:]))
    return (old - new) / abs(old) < tol


def train_stage1(state: TrainState, batch: PlaneBatch) -> TrainState:
    """The lossless model on x quantized by the fixed QP-75 table.

    With ``stage1_converge`` training continues past the scheduled epochs
    (up to ``stage1_max_epochs``) until the convergence test passes.
    """
    c = state.config
    qp = LearnedTables.standard(75, trainable=False)
    params = state.model.parameters()

    def step(sub, rng):
        return loss_model(state.model, qp, sub, rng)[0]

    planned = c.scaled(c.stage1_epochs)
    cap = max(planned, c.stage1_max_epochs) if c.stage1_converge else planned
    interval = c.scaled(c.stage1_interval)
    reset_moments(params)
    losses = []
    for e in range(cap):
        losses.append(_epoch(state, batch, params, e, lr_decay(c.stage1_lr, c.stage1_gamma, interval, e),
                             _STREAM_STAGE1, step, "stage1"))
        if c.stage1_converge and e + 1 >= planned and _converged(losses, c.convergence_window, c.convergence_tol):
            break
    state.stage1_epochs = len(losses)
    state.history.append(("stage1", losses))
    return state


def train_stage2(state: TrainState, batch: PlaneBatch) -> TrainState:
    """Alternate (a) model finetuning with L_m and (b) table finetuning with L_q."""
    c = state.config
    point = c.point
    model_params = state.model.parameters()
    table_params = state.tables.parameters()

    def model_step(sub, rng):
        return loss_model(state.model, state.tables, sub, rng)[0]

    def table_step(sub, rng):
        return loss_rd(state.model, state.tables, sub, point, rng, domain=c.domain)[0]

    me, te = c.scaled(c.model_epochs), c.scaled(c.table_epochs)
    mi, ti = c.scaled(c.model_interval), c.scaled(c.table_interval)
    for r in range(state.round_index, c.rounds):
        a = _run_epochs(state, batch, model_params, me, c.model_lr, c.model_gamma, mi,
                        _STREAM_MODEL, model_step, "model", r * me)
        state.history.append(("model", r, a))
        if table_params:
            b = _run_epochs(state, batch, table_params, te, c.table_lr, c.table_gamma, ti,
                            _STREAM_TABLES, table_step, "tables", r * te)
            state.history.append(("tables", r, b))
        state.round_index = r + 1
    return state


def train(config: TrainConfig, batch: PlaneBatch | None = None, init: TrainState | None = None) -> TrainState:
    """Full procedure. ``init`` resumes from a stage-1 (or later) checkpoint."""
    if batch is None:
        batch = load_corpus(config.corpus, config.pad_multiple)
    if init is None:
        state = initial_state(config, batch)
        state = train_stage1(state, batch)
    else:
        tables = LearnedTables.standard(config.init_quality, trainable=config.learn_tables)
        state = TrainState(CodecModel.from_bytes(init.model.to_bytes()), tables, config,
                           init.stage1_epochs, 0)
    return train_stage2(state, batch)


# --------------------------------------------------------------------------- evaluation


def evaluate_losses(state_or_model, tables: LearnedTables, batch: PlaneBatch, point: TradeoffPoint,
                    domain: str = "rgb", chunk: int = 8) -> dict:
    """Hard-rounded rate and distortion over a batch: bpp, 8-bit MSE and L_q per pixel."""
    model = state_or_model.model if isinstance(state_or_model, TrainState) else state_or_model
    frozen_tables = tables.frozen_copy() if tables.trainable else tables
    dec = frozen_tables_with_rounded_inverse(frozen_tables)
    bits = 0.0
    sq = 0.0
    pixels = 0
    with no_grad():
        for start in range(0, batch.batch_size, chunk):
            sub = batch.take(np.arange(start, min(start + chunk, batch.batch_size)))
            _, report, d = loss_rd(model, dec, sub, point, None, relaxation="round", domain=domain)
            bits += report.total_bits
            sq += float(d.data) * sub.pixel_count
            pixels += sub.pixel_count
    bpp = bits / pixels
    mse = sq / pixels * 255.0 ** 2
    return {"bpp": bpp, "mse": mse, "loss": point.lambda_r * bpp + point.lambda_d * mse}


def frozen_tables_with_rounded_inverse(tables: LearnedTables) -> LearnedTables:
    """Continuous Q_t with the integer Q_t' that a decoder actually applies."""
    dl, dc = tables.decoder_tables()
    steps = {n: tables.values(n) for n in NAMES}
    steps["qti_luma"], steps["qti_chroma"] = dl.natural.astype(np.float64), dc.natural.astype(np.float64)
    return LearnedTables(steps, trainable=False)

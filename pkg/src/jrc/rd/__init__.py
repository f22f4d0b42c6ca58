"""Learned quantization tables, the two losses and the alternating training procedure."""

from .losses import TradeoffPoint, batch_rate, distortion, frozen, loss_model, loss_rd, quantize
from .tables import NAMES, STEP_MAX, STEP_MIN, LearnedTables
from .train import (
    LAMBDA_GRID,
    TrainConfig,
    TrainingDiverged,
    TrainState,
    evaluate_losses,
    initial_state,
    lambda_grid,
    load_corpus,
    load_model,
    train,
    train_stage1,
    train_stage2,
)

__all__ = [
    "LAMBDA_GRID", "LearnedTables", "NAMES", "STEP_MAX", "STEP_MIN", "TradeoffPoint", "TrainConfig",
    "TrainState", "TrainingDiverged", "batch_rate", "distortion", "evaluate_losses", "frozen",
    "initial_state", "lambda_grid", "load_corpus", "load_model", "loss_model", "loss_rd", "quantize",
    "train", "train_stage1", "train_stage2",
]

"""Trainer service: the alternating G/D/E optimisation loop."""

from src.services.trainer.checkpoint import (
    load_checkpoint,
    load_embeddings,
    load_generator_weights,
    read_checkpoint_state,
    restore_generator,
    save_checkpoint,
)
from src.services.trainer.models import (
    CheckpointState,
    EvaluationPoint,
    LossRecord,
    TrainingHistory,
    TrainResult,
)
from src.services.trainer.service import GacnTrainer, train

__all__ = [
    "CheckpointState",
    "EvaluationPoint",
    "GacnTrainer",
    "LossRecord",
    "TrainResult",
    "TrainingHistory",
    "load_checkpoint",
    "load_embeddings",
    "load_generator_weights",
    "read_checkpoint_state",
    "restore_generator",
    "save_checkpoint",
    "train",
]

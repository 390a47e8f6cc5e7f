"""Training history records and results."""

from dataclasses import dataclass
from typing import Literal, Optional

import torch
from pydantic import BaseModel, Field

from src.services.view_generator.models import ViewStatistics

Phase = Literal["g_step", "d_step", "e_step"]


class LossRecord(BaseModel):
    """Loss values of one training step."""

    iteration: int
    phase: Phase
    values: dict[str, float]
    # Batch classification accuracy (D-Steps only)
    accuracy: Optional[float] = None


class EvaluationPoint(BaseModel):
    """Validation metric at one evaluation, with optional generated-view statistics."""

    iteration: int
    metric: str
    value: float
    view_stats: Optional[ViewStatistics] = None


class TrainingHistory(BaseModel):
    losses: list[LossRecord] = Field(default_factory=list)
    evaluations: list[EvaluationPoint] = Field(default_factory=list)
    iterations_run: int = 0
    best_iteration: Optional[int] = None
    stopped_early: bool = False


class CheckpointState(BaseModel):
    """Contents of state.json in a checkpoint directory."""

    iteration: int
    config_hash: str
    config: dict
    n_nodes: int
    support_size: int
    best_metric: Optional[float] = None
    reason: Literal["periodic", "final", "failure"] = "periodic"


@dataclass(frozen=True, eq=False)
class TrainResult:
    """Trained layer-0 table, clean-graph readout embeddings and history."""

    table: torch.Tensor
    embeddings: torch.Tensor
    history: TrainingHistory

"""Checkpoint directories: one torch file per component plus state.json."""

import logging
from pathlib import Path
from typing import TYPE_CHECKING

import torch

from src.core.config import TrainConfig
from src.core.errors import RunDirectoryError
from src.core.storage import atomic_torch_save, atomic_write_text
from src.graph.models import CandidateSet, Graph
from src.services.trainer.models import CheckpointState
from src.services.view_generator import ViewGenerator

if TYPE_CHECKING:
    from src.services.trainer.service import GacnTrainer

logger = logging.getLogger(__name__)

GENERATOR_FILE = "generator.pt"
DISCRIMINATOR_FILE = "discriminator.pt"
EMBEDDINGS_FILE = "embeddings.pt"
OPTIMIZER_FILE = "optimizer.pt"
RNG_FILE = "rng.pt"
STATE_FILE = "state.json"
GENERATOR_TABLE_FILE = "generator.tsv"

REQUIRED_FILES = (GENERATOR_FILE, DISCRIMINATOR_FILE, EMBEDDINGS_FILE, OPTIMIZER_FILE, RNG_FILE, STATE_FILE)


def save_checkpoint(trainer: "GacnTrainer", directory: Path, reason: str = "periodic") -> CheckpointState:
    """
    Write every component atomically; state.json goes last.

    Args:
        trainer: Trainer to snapshot
        directory: Checkpoint directory (created if missing)
        reason: "periodic", "final" or "failure"

    Returns:
        The CheckpointState written to state.json
    """
    directory.mkdir(parents=True, exist_ok=True)
    atomic_torch_save(trainer.generator.state_dict(), directory / GENERATOR_FILE)
    atomic_torch_save(trainer.discriminator.state_dict(), directory / DISCRIMINATOR_FILE)
    atomic_torch_save(trainer.embeddings.state_dict(), directory / EMBEDDINGS_FILE)
    atomic_torch_save(
        {
            "g": trainer.g_optimizer.state_dict(),
            "d": trainer.d_optimizer.state_dict(),
            "e": trainer.e_optimizer.state_dict(),
        },
        directory / OPTIMIZER_FILE,
    )
    atomic_torch_save(trainer.rng.state_dict(), directory / RNG_FILE)
    trainer.generator.export_support(directory / GENERATOR_TABLE_FILE)

    state = CheckpointState(
        iteration=trainer.iteration,
        config_hash=trainer.cfg.config_hash(),
        config=trainer.cfg.model_dump(),
        n_nodes=trainer.g.n_nodes,
        support_size=int(trainer.generator.w.shape[0]),
        best_metric=trainer.best_metric,
        reason=reason,
    )
    atomic_write_text(directory / STATE_FILE, state.model_dump_json(indent=2))
    logger.info(f"Saved {reason} checkpoint at iteration {trainer.iteration} to {directory}")
    return state


def read_checkpoint_state(directory: Path) -> CheckpointState:
    missing = [name for name in REQUIRED_FILES if not (directory / name).exists()]
    if missing:
        raise RunDirectoryError(f"Checkpoint {directory} is missing: {', '.join(missing)}")
    return CheckpointState.model_validate_json((directory / STATE_FILE).read_text(encoding="utf-8"))


def load_checkpoint(trainer: "GacnTrainer", directory: Path) -> CheckpointState:
    """
    Restore a trainer in place from a checkpoint directory.

    Raises:
        RunDirectoryError: If files are missing or the checkpoint belongs to
            another graph or configuration
    """
    state = read_checkpoint_state(directory)
    if state.n_nodes != trainer.g.n_nodes or state.support_size != trainer.generator.w.shape[0]:
        raise RunDirectoryError(f"Checkpoint {directory} was written for a different graph")
    if state.config_hash != trainer.cfg.config_hash():
        raise RunDirectoryError(
            f"Checkpoint {directory} was written with config {state.config_hash}, "
            f"not {trainer.cfg.config_hash()}"
        )

    trainer.generator.load_state_dict(torch.load(directory / GENERATOR_FILE))
    trainer.discriminator.load_state_dict(torch.load(directory / DISCRIMINATOR_FILE))
    trainer.embeddings.load_state_dict(torch.load(directory / EMBEDDINGS_FILE))
    optimizers = torch.load(directory / OPTIMIZER_FILE)
    trainer.g_optimizer.load_state_dict(optimizers["g"])
    trainer.d_optimizer.load_state_dict(optimizers["d"])
    trainer.e_optimizer.load_state_dict(optimizers["e"])
    trainer.rng.load_state_dict(torch.load(directory / RNG_FILE))
    trainer.iteration = state.iteration
    trainer.best_metric = state.best_metric
    logger.info(f"Loaded checkpoint from {directory} at iteration {state.iteration}")
    return state


def load_embeddings(directory: Path) -> torch.Tensor:
    """Layer-0 table from a checkpoint directory."""
    path = directory / EMBEDDINGS_FILE
    if not path.exists():
        raise RunDirectoryError(f"No embeddings in {directory}")
    return torch.load(path)["table"]


def load_generator_weights(directory: Path) -> dict[str, torch.Tensor]:
    """Generator state (support pairs, candidate mask, weights) from a checkpoint directory."""
    path = directory / GENERATOR_FILE
    if not path.exists():
        raise RunDirectoryError(f"No generator checkpoint in {directory}")
    return torch.load(path)


def restore_generator(directory: Path, g: Graph, cfg: TrainConfig) -> ViewGenerator:
    """Rebuild a trained generator on g from a checkpoint directory."""
    state = load_generator_weights(directory)
    mask = state["is_candidate"].numpy().astype(bool)
    candidates = CandidateSet(pairs=state["pairs"].numpy()[mask], top_k=cfg.candidate_top_k)
    generator = ViewGenerator.from_config(g, candidates, cfg)
    if generator.pairs.shape != state["pairs"].shape or not torch.equal(generator.pairs, state["pairs"]):
        raise RunDirectoryError(f"Generator support in {directory} does not match the graph's training edges")
    generator.load_state_dict(state)
    return generator

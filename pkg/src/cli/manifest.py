"""Run directories and their manifests."""

import logging
import subprocess
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Optional

from pydantic import BaseModel

from src.core.config import TrainConfig
from src.core.errors import RunDirectoryError
from src.core.storage import write_new_text
from src.graph.dataset import DatasetFingerprint

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
CHECKPOINT_DIR = "checkpoint"
HISTORY_FILE = "history.jsonl"
EMBEDDINGS_FILE = "embeddings.tsv"
METRICS_FILE = "metrics.jsonl"


class RunManifest(BaseModel):
    """Everything needed to reproduce or re-evaluate a run."""

    config: TrainConfig
    config_hash: str
    dataset_dir: Path
    dataset: DatasetFingerprint
    build_id: str
    seed: int
    output_dir: Path
    variant: Optional[str] = None
    created_at: str


def build_id() -> str:
    """git describe of the working tree, or the installed package version."""
    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
        if result.returncode == 0 and result.stdout.strip():
            return result.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        return f"gacn-{metadata.version('gacn')}"
    except metadata.PackageNotFoundError:
        return "unknown"


def new_manifest(
    cfg: TrainConfig,
    dataset_dir: Path,
    dataset: DatasetFingerprint,
    output_dir: Path,
    variant: Optional[str] = None,
) -> RunManifest:
    return RunManifest(
        config=cfg,
        config_hash=cfg.config_hash(),
        dataset_dir=dataset_dir.resolve(),
        dataset=dataset,
        build_id=build_id(),
        seed=cfg.seed,
        output_dir=output_dir.resolve(),
        variant=variant,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def write_manifest(run_dir: Path, manifest: RunManifest) -> Path:
    """
    Write the run's manifest; a run directory holds exactly one.

    Raises:
        RunDirectoryError: If the directory already has a manifest
    """
    path = run_dir / MANIFEST_FILE
    try:
        write_new_text(path, manifest.model_dump_json(indent=2) + "\n")
    except FileExistsError as e:
        raise RunDirectoryError(f"Run directory already has a manifest: {run_dir}") from e
    logger.info(f"Wrote manifest {path}")
    return path


def read_manifest(run_dir: Path) -> RunManifest:
    path = run_dir / MANIFEST_FILE
    if not path.exists():
        raise RunDirectoryError(f"Not a run directory (missing {MANIFEST_FILE}): {run_dir}")
    return RunManifest.model_validate_json(path.read_text(encoding="utf-8"))

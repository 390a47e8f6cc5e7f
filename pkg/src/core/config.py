"""Application configuration using Pydantic Settings, plus the training configuration."""

import hashlib
import logging
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.core.errors import ConfigurationError

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="GACN_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "gacn"
    log_level: str = "INFO"

    # Default root for run directories (GACN_OUTPUT_ROOT)
    output_root: Path = Path("runs")

    # Root holding canonical dataset directories (GACN_DATA_ROOT)
    data_root: Path = Path("data")

    # Sweep concurrency: number of worker processes
    sweep_jobs: int = 1


settings = Settings()


class TrainConfig(BaseModel):
    """Hyper-parameters and knobs of one GACN training run.

    Field names are the keys accepted in config files and as CLI flags.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Optimisation
    lr: float = Field(1e-3, gt=0)
    dim: int = Field(128, ge=1)
    layers: int = Field(2, ge=0)
    seed: int = 0

    # View generator
    tau_g: float = Field(1e-4, gt=0, le=1)
    lambda_g: float = Field(0.5, ge=0)
    lambda_cnt: float = Field(1.0, ge=0)
    lambda_new: float = Field(0.5, ge=0)
    lambda_adv: float = Field(1.0, ge=0)
    gamma: float = Field(0.75, ge=0, le=1)
    candidate_top_k: int = Field(2000, ge=1)
    candidate_cap_factor: int = Field(50, ge=1)

    # Encoder / SSL objectives
    tau_f: float = Field(0.5, gt=0)
    lambda_gcl: float = Field(1.0, ge=0)
    lambda_bpr: float = Field(1e-4, ge=0)
    feature_init: bool = True
    init_std: float = Field(0.1, gt=0)
    negative_pool: int = Field(4096, ge=1)
    negative_pool_threshold: int = Field(20000, ge=1)
    bpr_on_views: bool = False

    # Predefined augmentation; None keeps edges at rate lambda_g
    dropout_keep: Optional[float] = Field(None, gt=0, le=1)
    contrast_view: Literal["generator", "dropout", "replacement"] = "generator"
    replacement_rate: float = Field(0.0, ge=0, lt=1)

    # View discriminator
    mlp_layers: int = Field(2, ge=1)
    mlp_hidden: Optional[int] = Field(None, ge=1)
    mlp_init: Literal["xavier", "zeros"] = "xavier"
    views_per_d_step: int = Field(4, ge=1)
    d_step_updates_encoder: bool = False

    # Loop
    n_g: int = Field(1, ge=0)
    n_d: int = Field(1, ge=0)
    n_e: int = Field(1, ge=0)
    max_iters: int = Field(5000, ge=0)
    patience: int = Field(10, ge=1)
    eval_every: int = Field(50, ge=1)

    # Generated-view statistics tracked at every evaluation
    track_view_stats: bool = False
    stats_views: int = Field(10, ge=1)
    stats_threshold: float = Field(0.5, gt=0, lt=1)

    @model_validator(mode="after")
    def _check_replacement(self) -> "TrainConfig":
        if self.replacement_rate > 0 and self.contrast_view != "replacement":
            raise ValueError("replacement_rate requires contrast_view=replacement")
        return self

    @property
    def keep_rate(self) -> float:
        """Edge-dropout keep rate for predefined-augmentation views."""
        if self.dropout_keep is not None:
            return self.dropout_keep
        return min(max(self.lambda_g, 1e-6), 1.0)

    @property
    def hidden_width(self) -> int:
        """Hidden width of the discriminator MLP (2·dim unless overridden)."""
        return self.mlp_hidden or 2 * self.dim

    def config_hash(self) -> str:
        """Short stable hash of the resolved configuration."""
        payload = self.model_dump_json()
        return hashlib.sha256(payload.encode()).hexdigest()[:12]

    def with_updates(self, **updates: Any) -> "TrainConfig":
        """Return a validated copy with some fields replaced."""
        return build_config({**self.model_dump(), **updates})


# λ_gcl / λ_bpr balance differs between citation graphs and interaction graphs
DATASET_PRESETS: dict[str, dict[str, float]] = {
    "cora": {"lambda_gcl": 1.0, "lambda_bpr": 1e-4},
    "citeseer": {"lambda_gcl": 1.0, "lambda_bpr": 1e-4},
    "uci": {"lambda_gcl": 1.0, "lambda_bpr": 1e-4},
    "taobao": {"lambda_gcl": 1e-4, "lambda_bpr": 1.0},
    "amazon": {"lambda_gcl": 1e-4, "lambda_bpr": 1.0},
    "lastfm": {"lambda_gcl": 1e-4, "lambda_bpr": 1.0},
    "kuaishou": {"lambda_gcl": 1e-4, "lambda_bpr": 1.0},
}


def build_config(values: dict[str, Any]) -> TrainConfig:
    """
    Validate a flat mapping into a TrainConfig.

    Raises:
        ConfigurationError: On unknown keys or invalid values
    """
    for key in values:
        if key not in TrainConfig.model_fields:
            raise ConfigurationError(f"Unknown config key: {key}")
    try:
        return TrainConfig.model_validate(values)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(p) for p in first["loc"]) or "config"
        raise ConfigurationError(f"Invalid value for {field}: {first['msg']}") from e


def parse_config_file(path: Path) -> dict[str, str]:
    """
    Parse a flat key=value config file.

    Args:
        path: Config file path

    Returns:
        Mapping of raw string values (types are coerced by TrainConfig)

    Raises:
        ConfigurationError: If the file is missing or a line is malformed
    """
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {path}")

    values: dict[str, str] = {}
    for line_number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{line_number}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{path}:{line_number}: empty key")
        values[key] = value
    return values


def resolve_config(
    config_path: Optional[Path] = None,
    overrides: Optional[dict[str, Any]] = None,
    preset: Optional[str] = None,
) -> TrainConfig:
    """
    Resolve defaults < dataset preset < config file < overrides.

    Args:
        config_path: Optional flat key=value file
        overrides: Values from command-line flags
        preset: Optional dataset preset name (e.g. "cora", "kuaishou")

    Returns:
        Fully validated TrainConfig
    """
    values: dict[str, Any] = {}
    if preset:
        if preset not in DATASET_PRESETS:
            raise ConfigurationError(
                f"Unknown preset: {preset}. Supported: {', '.join(sorted(DATASET_PRESETS))}"
            )
        values.update(DATASET_PRESETS[preset])
    if config_path is not None:
        values.update(parse_config_file(config_path))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})

    config = build_config(values)
    logger.debug(f"Resolved config {config.config_hash()}: {config.model_dump()}")
    return config

"""Ablations, the edge-replacement curve and sensitivity sweeps."""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import torch

from src.core.config import TrainConfig
from src.core.errors import ConfigurationError, ContractError
from src.core.storage import write_table
from src.graph.models import Graph
from src.services.evaluation.models import CurvePoint, MetricsRecord, SweepRow, Task, Variant
from src.services.evaluation.probe import linear_probe
from src.services.evaluation.ranking import link_rank
from src.services.trainer import train

logger = logging.getLogger(__name__)

VARIANTS: tuple[str, ...] = ("full", "wo_reg", "wo_gan", "wo_ssl", "wo_gcl", "wo_bpr")

# Config overrides per ablation variant
ABLATION_OVERRIDES: dict[str, dict[str, Any]] = {
    "full": {},
    "wo_reg": {"lambda_cnt": 0.0, "lambda_new": 0.0},
    "wo_gan": {"n_g": 0, "n_d": 0, "contrast_view": "dropout"},
    "wo_ssl": {"n_e": 0},
    "wo_gcl": {"lambda_gcl": 0.0},
    "wo_bpr": {"lambda_bpr": 0.0},
}


def primary_task(g: Graph) -> Task:
    """Link prediction when the graph carries an edge split, otherwise node classification."""
    if g.edge_split is not None:
        return "link_prediction"
    if g.node_split is not None and g.labels is not None:
        return "node_classification"
    raise ConfigurationError("Graph has neither an edge split nor labelled node splits to evaluate")


def primary_metric(task: Task) -> str:
    return "MRR" if task == "link_prediction" else "F1"


class ValidationEvaluator:
    """Validation metric on clean-graph embeddings, used for early stopping."""

    def __init__(self, g: Graph, seed: int = 0):
        self.g = g
        self.seed = seed
        self.task = primary_task(g)
        self.metric_name = f"val_{primary_metric(self.task)}"

    def __call__(self, embeddings: torch.Tensor) -> float:
        if self.task == "link_prediction":
            return link_rank(embeddings, self.g, part="val", seed=self.seed).metrics["MRR"]
        return linear_probe(embeddings, self.g, n_inits=1, seed=self.seed, part="val").metrics["F1"]


def validation_evaluator(g: Graph, seed: int = 0) -> Optional[ValidationEvaluator]:
    """Evaluator for early stopping, or None when the graph has no validation data."""
    if g.edge_split is not None and len(g.edge_split.val):
        return ValidationEvaluator(g, seed)
    if g.edge_split is None and g.node_split is not None and len(g.node_split.val) and g.labels is not None:
        return ValidationEvaluator(g, seed)
    logger.info("No validation data; training runs to max_iters")
    return None


def evaluate_embeddings(
    embeddings: Union[torch.Tensor, np.ndarray],
    g: Graph,
    cfg: TrainConfig,
    task: Optional[Task] = None,
    variant: Optional[str] = None,
    n_inits: int = 10,
) -> MetricsRecord:
    """Test-part metrics for the graph's primary (or the given) task."""
    task = task or primary_task(g)
    if task == "link_prediction":
        return link_rank(embeddings, g, seed=cfg.seed, config_hash=cfg.config_hash(), variant=variant)
    return linear_probe(
        embeddings, g, n_inits=n_inits, seed=cfg.seed, config_hash=cfg.config_hash(), variant=variant
    )


def ablation_config(cfg: TrainConfig, variant: str) -> TrainConfig:
    if variant not in ABLATION_OVERRIDES:
        raise ConfigurationError(f"Unknown variant: {variant}. Supported: {', '.join(VARIANTS)}")
    return cfg.with_updates(**ABLATION_OVERRIDES[variant])


def run_ablation(
    variant: Variant,
    g: Graph,
    cfg: TrainConfig,
    checkpoint_dir: Optional[Path] = None,
) -> MetricsRecord:
    """
    Train and evaluate one ablation variant.

    Args:
        variant: One of full, wo_reg, wo_gan, wo_ssl, wo_gcl, wo_bpr
        g: Graph with evaluation splits
        cfg: Base configuration (the variant's toggles are applied on top)
        checkpoint_dir: Optional checkpoint directory for the run

    Returns:
        Test MetricsRecord tagged with the variant
    """
    variant_cfg = ablation_config(cfg, variant)
    logger.info(f"Running variant {variant} (seed={variant_cfg.seed})")
    result = train(g, variant_cfg, evaluator=validation_evaluator(g, variant_cfg.seed), checkpoint_dir=checkpoint_dir)
    return evaluate_embeddings(result.embeddings, g, variant_cfg, variant=variant)


def edge_replacement_experiment(
    g: Graph,
    rates: Sequence[float],
    cfg: TrainConfig,
    out_path: Optional[Path] = None,
) -> list[CurvePoint]:
    """
    Metric of the dropout-only pipeline as a share of kept edges is swapped for random non-edges.

    One view of each contrastive pair is plain edge dropout; the other is
    edge dropout followed by replacing a `rate` share of its edges. Rate 0
    reproduces the plain dropout pipeline.

    Returns:
        One CurvePoint per requested rate, also written as a table when
        out_path is given
    """
    if any(not 0 <= r < 1 for r in rates):
        raise ContractError(f"replacement rates must lie in [0, 1), got {list(rates)}")
    base = ablation_config(cfg, "wo_gan")
    task = primary_task(g)
    metric = primary_metric(task)

    curve = []
    for rate in rates:
        rate_cfg = base.with_updates(contrast_view="replacement", replacement_rate=float(rate))
        result = train(g, rate_cfg, evaluator=validation_evaluator(g, rate_cfg.seed))
        record = evaluate_embeddings(result.embeddings, g, rate_cfg, task=task, variant=f"replace_{rate}")
        curve.append(CurvePoint(rate=float(rate), metric=metric, value=record.metrics[metric]))
        logger.info(f"Replacement rate {rate}: {metric}={record.metrics[metric]:.4f}")

    if out_path is not None:
        write_table(out_path, ["rate", metric], [[p.rate, p.value] for p in curve])
    return curve


def sensitivity_ratio(value: float, default_value: float) -> float:
    """η = metric at a grid point / metric at the default configuration."""
    if default_value == 0:
        raise ContractError("sensitivity ratio undefined: default metric is 0")
    return value / default_value


def _grid_point(args: tuple[Graph, TrainConfig, Task]) -> float:
    g, cfg, task = args
    result = train(g, cfg, evaluator=validation_evaluator(g, cfg.seed))
    return evaluate_embeddings(result.embeddings, g, cfg, task=task).metrics[primary_metric(task)]


def run_sweep(
    g: Graph,
    base_cfg: TrainConfig,
    grid: dict[str, Sequence[Any]],
    jobs: int = 1,
    out_path: Optional[Path] = None,
) -> list[SweepRow]:
    """
    One-at-a-time sensitivity sweep.

    Each parameter in the grid is varied alone with the rest at base_cfg.
    Grid points equal to the default reuse the default run, so their η is
    exactly 1.

    Args:
        g: Graph with evaluation splits
        base_cfg: Default configuration
        grid: Parameter name -> values to try
        jobs: Worker processes (1 runs sequentially)
        out_path: Optional table path

    Returns:
        One SweepRow per grid point
    """
    task = primary_task(g)
    metric = primary_metric(task)
    points: list[tuple[str, Any, TrainConfig]] = []
    for param, values in grid.items():
        if param not in TrainConfig.model_fields:
            raise ConfigurationError(f"Unknown config key: {param}")
        for value in values:
            points.append((param, value, base_cfg.with_updates(**{param: value})))

    configs = [base_cfg] + [cfg for _, _, cfg in points if cfg.config_hash() != base_cfg.config_hash()]
    unique = list({cfg.config_hash(): cfg for cfg in configs}.values())
    tasks = [(g, cfg, task) for cfg in unique]
    logger.info(f"Sweeping {len(points)} grid points ({len(unique)} distinct runs, jobs={jobs})")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(_grid_point, tasks))
    else:
        scores = [_grid_point(t) for t in tasks]
    by_hash = {cfg.config_hash(): score for cfg, score in zip(unique, scores)}
    default_score = by_hash[base_cfg.config_hash()]

    rows = [
        SweepRow(
            param=param,
            value=str(value),
            metric=metric,
            score=by_hash[cfg.config_hash()],
            eta=sensitivity_ratio(by_hash[cfg.config_hash()], default_score),
            config_hash=cfg.config_hash(),
        )
        for param, value, cfg in points
    ]
    if out_path is not None:
        write_table(out_path, ["param", "value", metric, "eta"], [[r.param, r.value, r.score, r.eta] for r in rows])
    return rows

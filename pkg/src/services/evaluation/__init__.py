"""Evaluation harness: probes, ranking, ablations, sweeps and view quality."""

from src.services.evaluation.experiments import (
    ABLATION_OVERRIDES,
    VARIANTS,
    ValidationEvaluator,
    ablation_config,
    edge_replacement_experiment,
    evaluate_embeddings,
    primary_metric,
    primary_task,
    run_ablation,
    run_sweep,
    sensitivity_ratio,
    validation_evaluator,
)
from src.services.evaluation.models import CurvePoint, DegreeProfile, MetricsRecord, SweepRow
from src.services.evaluation.probe import linear_probe
from src.services.evaluation.quality import new_edge_degree_profile, random_new_edge_profile
from src.services.evaluation.ranking import edge_ranks, link_rank
from src.services.evaluation.records import append_metrics, merge_metrics, read_metrics, summarize

__all__ = [
    "ABLATION_OVERRIDES",
    "CurvePoint",
    "DegreeProfile",
    "MetricsRecord",
    "SweepRow",
    "VARIANTS",
    "ValidationEvaluator",
    "ablation_config",
    "append_metrics",
    "edge_ranks",
    "edge_replacement_experiment",
    "evaluate_embeddings",
    "linear_probe",
    "link_rank",
    "merge_metrics",
    "new_edge_degree_profile",
    "primary_metric",
    "primary_task",
    "random_new_edge_profile",
    "read_metrics",
    "run_ablation",
    "run_sweep",
    "sensitivity_ratio",
    "summarize",
    "validation_evaluator",
]

"""Subcommand implementations behind the `gacn` entry point.

Each command takes parsed arguments, does its work through the service
packages and returns a JSON-serialisable summary that main() prints on
stdout.
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np
import torch

from src.cli.manifest import (
    CHECKPOINT_DIR,
    EMBEDDINGS_FILE,
    HISTORY_FILE,
    METRICS_FILE,
    RunManifest,
    new_manifest,
    read_manifest,
    write_manifest,
)
from src.core.config import TrainConfig, resolve_config, settings
from src.core.errors import ConfigurationError, RunDirectoryError
from src.core.rng import derive_seed
from src.core.storage import write_records
from src.graph import (
    IngestOptions,
    fingerprint,
    load_edge_list,
    load_features,
    load_labels,
    read_dataset,
    read_dataset_info,
    split_edges,
    split_nodes,
    write_dataset,
)
from src.graph.models import Graph
from src.services.encoder import export_embeddings, load_exported_embeddings
from src.services.evaluation import (
    ablation_config,
    append_metrics,
    edge_replacement_experiment,
    evaluate_embeddings,
    new_edge_degree_profile,
    random_new_edge_profile,
    run_sweep,
    validation_evaluator,
)
from src.services.trainer import load_embeddings, restore_generator, train
from src.services.view_generator import average_view_statistics, sample_relaxed_view, view_neighborhood

logger = logging.getLogger(__name__)

EVALUATIONS_FILE = "evaluations.jsonl"


def _floats(text: str, count: Optional[int] = None) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as e:
        raise ConfigurationError(f"Expected comma-separated numbers, got {text!r}") from e
    if count is not None and len(values) != count:
        raise ConfigurationError(f"Expected {count} comma-separated numbers, got {text!r}")
    return values


def parse_grid(entries: list[str]) -> dict[str, list[str]]:
    """Parse repeated `key=v1,v2,...` grid entries."""
    grid: dict[str, list[str]] = {}
    for entry in entries:
        key, sep, values = entry.partition("=")
        key = key.strip()
        if not sep or not key or not values.strip():
            raise ConfigurationError(f"Grid entries look like key=v1,v2; got {entry!r}")
        if key not in TrainConfig.model_fields:
            raise ConfigurationError(f"Unknown config key: {key}")
        grid[key] = [v.strip() for v in values.split(",") if v.strip()]
    return grid


def config_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Values of the TrainConfig flags that were given on the command line."""
    return {name: getattr(args, name) for name in TrainConfig.model_fields if getattr(args, name, None) is not None}


def resolve_run_config(args: argparse.Namespace) -> TrainConfig:
    cfg = resolve_config(config_path=args.config, overrides=config_overrides(args), preset=args.preset)
    variant = getattr(args, "variant", None)
    if variant:
        cfg = ablation_config(cfg, variant)
    return cfg


def _output_root(args: argparse.Namespace) -> Path:
    return args.output_root if args.output_root is not None else settings.output_root


def _load_run(run_dir: Path) -> tuple[RunManifest, Graph]:
    """Manifest plus the dataset it names, checked against the recorded fingerprint."""
    manifest = read_manifest(run_dir)
    g = read_dataset(manifest.dataset_dir)
    if fingerprint(g) != manifest.dataset:
        raise RunDirectoryError(f"Dataset {manifest.dataset_dir} changed since run {run_dir} was created")
    return manifest, g


def _load_run_embeddings(run_dir: Path, g: Graph) -> np.ndarray:
    path = run_dir / EMBEDDINGS_FILE
    if not path.exists():
        raise RunDirectoryError(f"Run directory has no embeddings: {run_dir}")
    return load_exported_embeddings(path, g.n_nodes)


def train_run(
    g: Graph,
    cfg: TrainConfig,
    dataset_dir: Path,
    run_dir: Path,
    variant: Optional[str] = None,
) -> dict[str, Any]:
    """Train into a fresh run directory: manifest, checkpoint, history, embeddings."""
    write_manifest(run_dir, new_manifest(cfg, dataset_dir, fingerprint(g), run_dir, variant))
    result = train(
        g,
        cfg,
        evaluator=validation_evaluator(g, cfg.seed),
        checkpoint_dir=run_dir / CHECKPOINT_DIR,
    )
    write_records(run_dir / HISTORY_FILE, result.history.losses)
    write_records(run_dir / EVALUATIONS_FILE, result.history.evaluations)
    export_embeddings(result.embeddings, g.id_map, run_dir / EMBEDDINGS_FILE)
    return {
        "run_dir": str(run_dir),
        "config_hash": cfg.config_hash(),
        "iterations": result.history.iterations_run,
        "best_iteration": result.history.best_iteration,
        "stopped_early": result.history.stopped_early,
    }


def cmd_ingest(args: argparse.Namespace) -> dict[str, Any]:
    """Parse raw files into a canonical dataset directory, optionally with splits."""
    options = IngestOptions(max_fields=args.max_fields)
    g = load_edge_list(args.input, options)
    if args.labels is not None:
        g = load_labels(args.labels, g, options)
    if args.features is not None:
        g = load_features(args.features, g, options)
    if args.split_edges is not None:
        g = split_edges(g, _floats(args.split_edges, 3), seed=args.seed)
    if args.split_nodes is not None:
        per_class, n_val, n_test = (int(v) for v in _floats(args.split_nodes, 3))
        g = split_nodes(g, per_class_train=per_class, n_val=n_val, n_test=n_test, seed=args.seed)

    info = write_dataset(g, args.out, name=args.name)
    return {"dataset_dir": str(args.out)} | info.model_dump(mode="json")


def cmd_train(args: argparse.Namespace) -> dict[str, Any]:
    cfg = resolve_run_config(args)
    info = read_dataset_info(args.dataset)
    g = read_dataset(args.dataset)
    run_name = args.run_name or f"{info.name}-{args.variant or 'full'}-{cfg.config_hash()}"
    return train_run(g, cfg, args.dataset, _output_root(args) / run_name, variant=args.variant)


def cmd_eval(args: argparse.Namespace) -> dict[str, Any]:
    """Evaluate a run's exported embeddings; appends to the run's metrics file."""
    manifest, g = _load_run(args.run_dir)
    embeddings = _load_run_embeddings(args.run_dir, g)
    record = evaluate_embeddings(
        embeddings, g, manifest.config, task=args.task, variant=manifest.variant, n_inits=args.n_inits
    )
    append_metrics(args.run_dir / METRICS_FILE, record)
    return record.model_dump(mode="json")


def cmd_ablate(args: argparse.Namespace) -> dict[str, Any]:
    """Train and evaluate each requested variant in its own run directory."""
    base = resolve_config(config_path=args.config, overrides=config_overrides(args), preset=args.preset)
    info = read_dataset_info(args.dataset)
    g = read_dataset(args.dataset)
    prefix = args.run_name or f"{info.name}-ablation-{base.config_hash()}"
    results = {}
    for variant in args.variants:
        cfg = ablation_config(base, variant)
        run_dir = _output_root(args) / f"{prefix}-{variant}"
        train_run(g, cfg, args.dataset, run_dir, variant=variant)
        record = evaluate_embeddings(_load_run_embeddings(run_dir, g), g, cfg, variant=variant, n_inits=args.n_inits)
        append_metrics(run_dir / METRICS_FILE, record)
        results[variant] = record.metrics
    return {"variants": results}


def cmd_sweep(args: argparse.Namespace) -> dict[str, Any]:
    base = resolve_config(config_path=args.config, overrides=config_overrides(args), preset=args.preset)
    g = read_dataset(args.dataset)
    rows = run_sweep(g, base, parse_grid(args.grid), jobs=args.jobs or settings.sweep_jobs, out_path=args.out)
    return {"rows": [row.model_dump(mode="json") for row in rows]}


def cmd_replacement_curve(args: argparse.Namespace) -> dict[str, Any]:
    base = resolve_config(config_path=args.config, overrides=config_overrides(args), preset=args.preset)
    g = read_dataset(args.dataset)
    curve = edge_replacement_experiment(g, _floats(args.rates), base, out_path=args.out)
    return {"curve": [point.model_dump(mode="json") for point in curve]}


def cmd_export_embeddings(args: argparse.Namespace) -> dict[str, Any]:
    """Export the clean readout embeddings, or the raw layer-0 table with --table."""
    _, g = _load_run(args.run_dir)
    if args.table:
        matrix = load_embeddings(args.run_dir / CHECKPOINT_DIR)
    else:
        matrix = torch.as_tensor(_load_run_embeddings(args.run_dir, g))
    path = export_embeddings(matrix, g.id_map, args.out, fmt=args.format)
    return {"path": str(path), "rows": int(matrix.shape[0]), "dim": int(matrix.shape[1])}


def cmd_view_stats(args: argparse.Namespace) -> dict[str, Any]:
    """Thresholded statistics of views drawn from a run's trained generator."""
    manifest, g = _load_run(args.run_dir)
    generator = restore_generator(args.run_dir / CHECKPOINT_DIR, g, manifest.config)
    rng = torch.Generator()
    rng.manual_seed(derive_seed(manifest.seed, "eval"))
    stats = average_view_statistics(generator, g, rng, args.views, args.threshold)
    summary: dict[str, Any] = {"statistics": stats.model_dump(mode="json")}
    if args.node is not None:
        with torch.no_grad():
            view = sample_relaxed_view(generator, rng, draw=args.views)
        summary["neighborhood"] = view_neighborhood(view, g, args.node, args.threshold, args.limit).model_dump(
            mode="json"
        )
    return summary


def cmd_degree_profile(args: argparse.Namespace) -> dict[str, Any]:
    """Generator new-edge mass by degree decile next to a random-attachment baseline."""
    manifest, g = _load_run(args.run_dir)
    generator = restore_generator(args.run_dir / CHECKPOINT_DIR, g, manifest.config)
    profile = new_edge_degree_profile(generator, g)
    n_random = max(1, round(profile.total_mass))
    baseline = random_new_edge_profile(g, n_random, seed=manifest.seed)
    return {"generator": profile.model_dump(mode="json"), "random": baseline.model_dump(mode="json")}


COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
    "replacement-curve": cmd_replacement_curve,
    "export-embeddings": cmd_export_embeddings,
    "view-stats": cmd_view_stats,
    "degree-profile": cmd_degree_profile,
}

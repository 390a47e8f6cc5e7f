"""GACN - adversarial view generation for graph contrastive learning.

Command-line entry point. Diagnostics go to stderr, machine-readable
results to stdout as one JSON document.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from src.cli import COMMANDS
from src.core.config import DATASET_PRESETS, TrainConfig, settings
from src.core.errors import GacnError
from src.core.logging import setup_logging
from src.services.evaluation import VARIANTS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def add_config_flags(parser: argparse.ArgumentParser) -> None:
    """--config/--preset plus one flag per TrainConfig field (e.g. --lambda_new 0.5)."""
    parser.add_argument("--config", type=Path, default=None, help="Flat key=value config file")
    parser.add_argument("--preset", choices=sorted(DATASET_PRESETS), default=None, help="Dataset preset")
    group = parser.add_argument_group("training config")
    for name, field in TrainConfig.model_fields.items():
        # Values stay strings here; TrainConfig validates and coerces them
        group.add_argument(f"--{name}", dest=name, type=str, default=None, help=f"default: {field.default}")


def add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--output-root", type=Path, default=None, help=f"Parent of run directories (default: {settings.output_root})"
    )
    parser.add_argument("--run-name", default=None, help="Run directory name under the output root")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gacn", description="Adversarial graph contrastive learning")
    parser.add_argument("--log-level", default=None, help=f"Logging level (default: {settings.log_level})")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="Build a canonical dataset directory from raw files")
    ingest.add_argument("input", type=Path, help="Edge-list file")
    ingest.add_argument("--out", type=Path, required=True, help="Dataset directory to write")
    ingest.add_argument("--name", default=None, help="Dataset name (default: directory name)")
    ingest.add_argument("--labels", type=Path, default=None, help="node_id class_id file")
    ingest.add_argument("--features", type=Path, default=None, help="node_id f1 ... fF file")
    ingest.add_argument("--split-edges", default=None, help="train,val,test edge ratios, e.g. 0.8,0.1,0.1")
    ingest.add_argument("--split-nodes", default=None, help="per_class_train,n_val,n_test, e.g. 20,500,1000")
    ingest.add_argument("--seed", type=int, default=0, help="Split seed")
    ingest.add_argument("--max-fields", type=int, default=3, help="Fields allowed per edge line")

    train = sub.add_parser("train", help="Train embeddings into a new run directory")
    train.add_argument("dataset", type=Path, help="Dataset directory")
    train.add_argument("--variant", choices=VARIANTS, default=None, help="Ablation variant")
    add_output_flags(train)
    add_config_flags(train)

    evaluate = sub.add_parser("eval", help="Evaluate a run's embeddings")
    evaluate.add_argument("run_dir", type=Path)
    evaluate.add_argument("--task", choices=["node_classification", "link_prediction"], default=None)
    evaluate.add_argument("--n-inits", type=int, default=10, help="Classifier initialisations to average")

    ablate = sub.add_parser("ablate", help="Train and evaluate ablation variants")
    ablate.add_argument("dataset", type=Path)
    ablate.add_argument("--variants", nargs="+", choices=VARIANTS, default=list(VARIANTS))
    ablate.add_argument("--n-inits", type=int, default=10)
    add_output_flags(ablate)
    add_config_flags(ablate)

    sweep = sub.add_parser("sweep", help="One-at-a-time sensitivity sweep")
    sweep.add_argument("dataset", type=Path)
    sweep.add_argument("--grid", action="append", required=True, help="key=v1,v2,... (repeatable)")
    sweep.add_argument("--jobs", type=int, default=None, help=f"Worker processes (default: {settings.sweep_jobs})")
    sweep.add_argument("--out", type=Path, default=None, help="Table to write")
    add_config_flags(sweep)

    curve = sub.add_parser("replacement-curve", help="Metric vs share of dropout-view edges replaced")
    curve.add_argument("dataset", type=Path)
    curve.add_argument("--rates", default="0,0.1,0.2,0.3,0.4,0.5", help="Comma-separated replacement rates")
    curve.add_argument("--out", type=Path, default=None, help="Table to write")
    add_config_flags(curve)

    export = sub.add_parser("export-embeddings", help="Export a run's embeddings")
    export.add_argument("run_dir", type=Path)
    export.add_argument("--out", type=Path, required=True)
    export.add_argument("--format", choices=["tsv", "npy"], default="tsv")
    export.add_argument("--table", action="store_true", help="Export the layer-0 table instead of the readout")

    stats = sub.add_parser("view-stats", help="Statistics of views from a trained generator")
    stats.add_argument("run_dir", type=Path)
    stats.add_argument("--views", type=int, default=10)
    stats.add_argument("--threshold", type=float, default=0.5)
    stats.add_argument("--node", type=int, default=None, help="Also list edges around this compact node id")
    stats.add_argument("--limit", type=int, default=20, help="Edges listed per group with --node")

    profile = sub.add_parser("degree-profile", help="New-edge mass by degree decile vs random attachment")
    profile.add_argument("run_dir", type=Path)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    setup_logging(args.log_level)
    try:
        result = COMMANDS[args.command](args)
    except GacnError as e:
        logger.debug("Command failed", exc_info=True)
        print(f"gacn {args.command}: error: {e}", file=sys.stderr)
        return EXIT_ERROR

    json.dump(result, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

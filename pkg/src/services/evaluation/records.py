"""Append-only metrics files and their aggregation."""

import logging
from collections import defaultdict
from pathlib import Path
from typing import Iterable

import numpy as np

from src.core.storage import append_record, iter_records, write_records
from src.services.evaluation.models import MetricsRecord

logger = logging.getLogger(__name__)


def append_metrics(path: Path, record: MetricsRecord) -> None:
    append_record(path, record)


def read_metrics(path: Path) -> list[MetricsRecord]:
    return list(iter_records(path, MetricsRecord))


def merge_metrics(paths: Iterable[Path], out_path: Path) -> list[MetricsRecord]:
    """Merge per-seed record files into one, ordered by task, variant and seed."""
    records = [r for path in paths for r in read_metrics(path)]
    records.sort(key=lambda r: (r.task, r.variant or "", r.seed))
    write_records(out_path, records)
    logger.info(f"Merged {len(records)} records into {out_path}")
    return records


def summarize(records: Iterable[MetricsRecord]) -> dict[str, dict[str, float]]:
    """Mean of every metric per (task, variant) group, keyed "task/variant"."""
    groups: dict[str, list[MetricsRecord]] = defaultdict(list)
    for record in records:
        groups[f"{record.task}/{record.variant or 'full'}"].append(record)
    return {
        key: {name: float(np.mean([r.metrics[name] for r in group])) for name in group[0].metrics}
        for key, group in sorted(groups.items())
    }

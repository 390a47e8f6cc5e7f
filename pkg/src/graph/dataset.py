"""Canonical dataset directories written by `gacn ingest`."""

import hashlib
import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import BaseModel

from src.core.errors import RunDirectoryError
from src.core.storage import atomic_write_text
from src.graph.models import EdgeSplit, Graph, NodeSplit

logger = logging.getLogger(__name__)

EDGES_FILE = "edges.tsv"
ID_MAP_FILE = "id_map.tsv"
LABELS_FILE = "labels.tsv"
FEATURES_FILE = "features.tsv"
SPLITS_DIR = "splits"
DATASET_FILE = "dataset.json"


class DatasetFingerprint(BaseModel):
    """Edge count plus a content hash of the canonical edges."""

    n_nodes: int
    n_edges: int
    sha256: str


class DatasetInfo(BaseModel):
    """Contents of dataset.json."""

    name: str
    fingerprint: DatasetFingerprint
    has_labels: bool
    has_features: bool
    edge_split: Optional[str] = None
    node_split: Optional[str] = None
    dropped_self_loops: int = 0
    merged_duplicates: int = 0


def fingerprint(g: Graph) -> DatasetFingerprint:
    """Fingerprint of the canonical (sorted, i<j) edge list."""
    digest = hashlib.sha256()
    digest.update(f"{g.n_nodes}\n".encode())
    digest.update(np.ascontiguousarray(g.edges, dtype="<i8").tobytes())
    return DatasetFingerprint(n_nodes=g.n_nodes, n_edges=g.n_edges, sha256=digest.hexdigest())


def _pairs_text(pairs: np.ndarray) -> str:
    return "".join(f"{i}\t{j}\n" for i, j in pairs.tolist())


def _read_pairs(path: Path) -> np.ndarray:
    if path.stat().st_size == 0:
        return np.empty((0, 2), dtype=np.int64)
    return np.loadtxt(path, dtype=np.int64, ndmin=2).reshape(-1, 2)


def _read_indices(path: Path) -> np.ndarray:
    if path.stat().st_size == 0:
        return np.empty(0, dtype=np.int64)
    return np.loadtxt(path, dtype=np.int64, ndmin=1).reshape(-1)


def write_dataset(g: Graph, directory: Path, name: Optional[str] = None) -> DatasetInfo:
    """
    Write a graph as a canonical dataset directory.

    Args:
        g: Graph (with optional labels, features and splits)
        directory: Target directory (created if missing)
        name: Dataset name (defaults to the directory name)

    Returns:
        DatasetInfo written to dataset.json
    """
    directory.mkdir(parents=True, exist_ok=True)
    atomic_write_text(directory / EDGES_FILE, _pairs_text(g.edges))
    atomic_write_text(directory / ID_MAP_FILE, "".join(f"{i}\t{node_id}\n" for i, node_id in enumerate(g.id_map)))

    if g.labels is not None:
        atomic_write_text(directory / LABELS_FILE, "".join(f"{i}\t{c}\n" for i, c in enumerate(g.labels.tolist())))
    if g.features is not None:
        rows = (f"{i}\t" + "\t".join(repr(v) for v in row) + "\n" for i, row in enumerate(g.features.tolist()))
        atomic_write_text(directory / FEATURES_FILE, "".join(rows))

    splits = directory / SPLITS_DIR
    if g.edge_split is not None:
        for part in ("train", "val", "test"):
            atomic_write_text(splits / f"{part}.tsv", _pairs_text(g.split_edges_of(part)))
        split_record = {"kind": "edges", "seed": g.edge_split.seed, "ratios": list(g.edge_split.ratios)}
        atomic_write_text(splits / "split.json", json.dumps(split_record, indent=2))
    if g.node_split is not None:
        for part in ("train", "val", "test"):
            nodes = getattr(g.node_split, part)
            atomic_write_text(splits / f"node_{part}.tsv", "".join(f"{v}\n" for v in nodes.tolist()))
        node_record = {"kind": "nodes", "provenance": g.node_split.provenance}
        atomic_write_text(splits / "node_split.json", json.dumps(node_record, indent=2))

    info = DatasetInfo(
        name=name or directory.name,
        fingerprint=fingerprint(g),
        has_labels=g.labels is not None,
        has_features=g.features is not None,
        edge_split=None if g.edge_split is None else g.edge_split.provenance,
        node_split=None if g.node_split is None else g.node_split.provenance,
        dropped_self_loops=g.dropped_self_loops,
        merged_duplicates=g.merged_duplicates,
    )
    atomic_write_text(directory / DATASET_FILE, info.model_dump_json(indent=2))
    logger.info(f"Wrote dataset {info.name} to {directory} ({g.n_nodes} nodes, {g.n_edges} edges)")
    return info


def read_dataset_info(directory: Path) -> DatasetInfo:
    path = directory / DATASET_FILE
    if not path.exists():
        raise RunDirectoryError(f"Not a dataset directory (missing {DATASET_FILE}): {directory}")
    return DatasetInfo.model_validate_json(path.read_text(encoding="utf-8"))


def read_dataset(directory: Path) -> Graph:
    """
    Read a dataset directory written by write_dataset.

    Raises:
        RunDirectoryError: If required files are missing or the edges do not
            match the recorded fingerprint
    """
    info = read_dataset_info(directory)
    id_map = tuple(
        line.split("\t", 1)[1]
        for line in (directory / ID_MAP_FILE).read_text(encoding="utf-8").splitlines()
        if line
    )
    edges = _read_pairs(directory / EDGES_FILE)
    g = Graph.from_pairs(len(id_map), edges, id_map=id_map)

    if fingerprint(g) != info.fingerprint:
        raise RunDirectoryError(f"Edges in {directory} do not match the recorded fingerprint")

    if info.has_labels:
        labels = np.loadtxt(directory / LABELS_FILE, dtype=np.int64, ndmin=2)[:, 1]
        g = g.with_labels(labels)
    if info.has_features:
        features = np.loadtxt(directory / FEATURES_FILE, dtype=np.float64, ndmin=2)[:, 1:]
        g = g.with_features(features)

    splits = directory / SPLITS_DIR
    if info.edge_split is not None:
        record = json.loads((splits / "split.json").read_text(encoding="utf-8"))
        index = {k: n for n, k in enumerate((g.edges[:, 0] * g.n_nodes + g.edges[:, 1]).tolist())}
        parts = {}
        for part in ("train", "val", "test"):
            pairs = _read_pairs(splits / f"{part}.tsv")
            parts[part] = np.sort(np.array([index[i * g.n_nodes + j] for i, j in pairs.tolist()], dtype=np.int64))
        g = g.with_edge_split(
            EdgeSplit(seed=record["seed"], ratios=tuple(record["ratios"]), **parts)
        )
    if info.node_split is not None:
        record = json.loads((splits / "node_split.json").read_text(encoding="utf-8"))
        parts = {}
        for part in ("train", "val", "test"):
            parts[part] = _read_indices(splits / f"node_{part}.tsv")
        g = g.with_node_split(NodeSplit(provenance=record["provenance"], **parts))

    logger.info(f"Read dataset {info.name}: {g.n_nodes} nodes, {g.n_edges} edges")
    return g

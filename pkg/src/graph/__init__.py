"""Graph storage, ingestion, candidate sets and splits."""

from src.graph.candidates import build_candidate_set, degree_order
from src.graph.dataset import (
    DatasetFingerprint,
    DatasetInfo,
    fingerprint,
    read_dataset,
    read_dataset_info,
    write_dataset,
)
from src.graph.loader import IngestOptions, load_edge_list, load_features, load_labels
from src.graph.models import CandidateSet, EdgeSplit, Graph, NodeSplit
from src.graph.splits import split_edges, split_nodes

__all__ = [
    "CandidateSet",
    "DatasetFingerprint",
    "DatasetInfo",
    "EdgeSplit",
    "Graph",
    "IngestOptions",
    "NodeSplit",
    "build_candidate_set",
    "degree_order",
    "fingerprint",
    "load_edge_list",
    "load_features",
    "load_labels",
    "read_dataset",
    "read_dataset_info",
    "split_edges",
    "split_nodes",
    "write_dataset",
]

"""Immutable graph containers."""

import dataclasses
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.sparse as sp

from src.core.errors import ContractError

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


def pair_keys(pairs: np.ndarray, n_nodes: int) -> np.ndarray:
    """Encode (i, j) rows with i < j as sortable int64 keys."""
    if len(pairs) == 0:
        return np.empty(0, dtype=np.int64)
    return pairs[:, 0].astype(np.int64) * n_nodes + pairs[:, 1].astype(np.int64)


def canonical_pairs(pairs: np.ndarray, n_nodes: int) -> tuple[np.ndarray, int, int]:
    """
    Canonicalise undirected pairs.

    Returns:
        Tuple of (sorted unique (i<j) pairs, self-loops dropped, duplicates merged)
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    loops = pairs[:, 0] == pairs[:, 1]
    n_loops = int(loops.sum())
    pairs = pairs[~loops]
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    keys = np.unique(lo * n_nodes + hi)
    canonical = np.stack([keys // n_nodes, keys % n_nodes], axis=1) if len(keys) else np.empty((0, 2), np.int64)
    return canonical, n_loops, len(pairs) - len(keys)


def symmetric_adjacency(pairs: np.ndarray, n_nodes: int) -> sp.csr_matrix:
    """Binary CSR adjacency holding both directions of each (i<j) pair."""
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    data = np.ones(len(rows), dtype=np.float64)
    adjacency = sp.csr_matrix((data, (rows, cols)), shape=(n_nodes, n_nodes))
    adjacency.sort_indices()
    return adjacency


@dataclass(frozen=True, eq=False)
class EdgeSplit:
    """Partition of edge indices for the link-prediction protocol."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int
    ratios: tuple[float, float, float]

    @property
    def provenance(self) -> str:
        return f"edges:ratios={self.ratios},seed={self.seed}"


@dataclass(frozen=True, eq=False)
class NodeSplit:
    """Partition of labelled nodes for the node-classification protocol."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    provenance: str


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Immutable undirected simple graph.

    Edges are stored once per unordered pair as (i, j) with i < j, sorted
    lexicographically. The adjacency holds both directions.
    """

    n_nodes: int
    edges: np.ndarray
    id_map: tuple[str, ...]
    labels: Optional[np.ndarray] = None
    features: Optional[np.ndarray] = None
    edge_split: Optional[EdgeSplit] = None
    node_split: Optional[NodeSplit] = None
    dropped_self_loops: int = 0
    merged_duplicates: int = 0

    def __post_init__(self) -> None:
        if len(self.id_map) != self.n_nodes:
            raise ContractError(f"id_map has {len(self.id_map)} entries for {self.n_nodes} nodes")
        edges = self.edges
        if len(edges):
            if edges.min() < 0 or edges.max() >= self.n_nodes:
                raise ContractError("Edge references a node outside 0..n_nodes-1")
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise ContractError("Edges must be stored as (i, j) with i < j (no self-loops)")
            keys = pair_keys(edges, self.n_nodes)
            if np.any(np.diff(keys) <= 0):
                raise ContractError("Edges must be sorted and deduplicated")
        if self.labels is not None and len(self.labels) != self.n_nodes:
            raise ContractError("labels must have one entry per node")
        if self.features is not None and self.features.shape[0] != self.n_nodes:
            raise ContractError("features must have one row per node")
        if self.edge_split is not None:
            self._check_partition(
                [self.edge_split.train, self.edge_split.val, self.edge_split.test],
                len(edges),
                "edge",
                exhaustive=True,
            )
        if self.node_split is not None:
            self._check_partition(
                [self.node_split.train, self.node_split.val, self.node_split.test],
                self.n_nodes,
                "node",
                exhaustive=False,
            )

    @staticmethod
    def _check_partition(parts: list[np.ndarray], size: int, kind: str, exhaustive: bool) -> None:
        merged = np.concatenate(parts) if parts else np.empty(0, np.int64)
        if len(merged) and (merged.min() < 0 or merged.max() >= size):
            raise ContractError(f"{kind} split references an invalid {kind} index")
        if len(np.unique(merged)) != len(merged):
            raise ContractError(f"{kind} splits must be disjoint")
        if exhaustive and len(merged) != size:
            raise ContractError(f"{kind} split must cover every {kind}")

    @classmethod
    def from_pairs(
        cls,
        n_nodes: int,
        pairs: np.ndarray,
        id_map: Optional[tuple[str, ...]] = None,
        labels: Optional[np.ndarray] = None,
        features: Optional[np.ndarray] = None,
    ) -> "Graph":
        """Build a graph from raw pairs, dropping self-loops and merging duplicates."""
        canonical, n_loops, n_dups = canonical_pairs(pairs, n_nodes)
        return cls(
            n_nodes=n_nodes,
            edges=_frozen(canonical),
            id_map=id_map if id_map is not None else tuple(str(i) for i in range(n_nodes)),
            labels=None if labels is None else _frozen(np.asarray(labels, dtype=np.int64)),
            features=None if features is None else _frozen(np.asarray(features, dtype=np.float64)),
            dropped_self_loops=n_loops,
            merged_duplicates=n_dups,
        )

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Full symmetric adjacency (all splits)."""
        return symmetric_adjacency(self.edges, self.n_nodes)

    @cached_property
    def train_edges(self) -> np.ndarray:
        """Edges visible to training (all edges when no edge split exists)."""
        if self.edge_split is None:
            return self.edges
        return _frozen(self.edges[np.sort(self.edge_split.train)])

    @cached_property
    def train_adjacency(self) -> sp.csr_matrix:
        """Symmetric adjacency of the training edges only."""
        if self.edge_split is None:
            return self.adjacency
        return symmetric_adjacency(self.train_edges, self.n_nodes)

    @cached_property
    def train_edge_keys(self) -> np.ndarray:
        return pair_keys(self.train_edges, self.n_nodes)

    def split_edges_of(self, part: str) -> np.ndarray:
        """Edges of one split part ("train", "val" or "test")."""
        if self.edge_split is None:
            raise ContractError("Graph has no edge split")
        return self.edges[np.sort(getattr(self.edge_split, part))]

    def degrees(self, train: bool = True) -> np.ndarray:
        """Node degrees over the training (default) or full adjacency."""
        adjacency = self.train_adjacency if train else self.adjacency
        return np.diff(adjacency.indptr).astype(np.int64)

    def has_train_edges(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Vectorised membership test of (i, j) in the training edges."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        keys = np.minimum(i, j) * self.n_nodes + np.maximum(i, j)
        table = self.train_edge_keys
        if len(table) == 0:
            return np.zeros(keys.shape, dtype=bool)
        pos = np.clip(np.searchsorted(table, keys), 0, len(table) - 1)
        return table[pos] == keys

    def with_edge_split(self, split: EdgeSplit) -> "Graph":
        return dataclasses.replace(self, edge_split=split)

    def with_node_split(self, split: NodeSplit) -> "Graph":
        return dataclasses.replace(self, node_split=split)

    def with_labels(self, labels: np.ndarray) -> "Graph":
        return dataclasses.replace(self, labels=_frozen(np.asarray(labels, dtype=np.int64)))

    def with_features(self, features: np.ndarray) -> "Graph":
        return dataclasses.replace(self, features=_frozen(np.asarray(features, dtype=np.float64)))

    def with_extra_nodes(self, new_ids: list[str]) -> "Graph":
        """Append isolated nodes (ids seen only in label/feature files)."""
        if not new_ids:
            return self
        extra = len(new_ids)
        labels = None
        if self.labels is not None:
            labels = np.concatenate([self.labels, np.full(extra, -1, dtype=np.int64)])
        features = None
        if self.features is not None:
            features = np.vstack([self.features, np.zeros((extra, self.features.shape[1]))])
        n_nodes = self.n_nodes + extra
        return dataclasses.replace(
            self,
            n_nodes=n_nodes,
            # keys depend on n_nodes, so re-canonicalise
            edges=_frozen(canonical_pairs(self.edges, n_nodes)[0]),
            id_map=self.id_map + tuple(new_ids),
            labels=None if labels is None else _frozen(labels),
            features=None if features is None else _frozen(features),
            node_split=None,
        )


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Non-edges eligible to become new edges in generated views."""

    pairs: np.ndarray
    top_k: int
    truncated: bool = False

    @property
    def size(self) -> int:
        return len(self.pairs)

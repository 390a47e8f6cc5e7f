"""Edge-list, label and feature file loaders."""

import logging
import re
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from pydantic import BaseModel, Field

from src.core.errors import EmptyGraphError, GraphFormatError
from src.graph.models import Graph

logger = logging.getLogger(__name__)

FIELD_SEPARATOR = re.compile(r"[,\s]+")
INTEGER_ID = re.compile(r"[+-]?\d+")


class IngestOptions(BaseModel):
    """Options controlling how raw text files are parsed."""

    comment_prefixes: tuple[str, ...] = ("#", "%")
    # Two node ids plus an ignored weight; KONECT files with timestamps need 4
    max_fields: int = Field(3, ge=2)


def _data_lines(path: Path, options: IngestOptions) -> Iterator[tuple[int, list[str]]]:
    """Yield (line_number, fields) for non-blank, non-comment lines."""
    if not path.exists():
        raise GraphFormatError("Input file not found", path=path)
    with open(path, encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith(options.comment_prefixes):
                continue
            yield line_number, FIELD_SEPARATOR.split(line)


class IdMap:
    """
    Compacts arbitrary node ids (integers or strings) to 0..n-1 in first-seen order.

    Purely numeric ids are canonicalised first, so "01" and "1" name the same node.
    """

    def __init__(self, ids: Optional[tuple[str, ...]] = None):
        self._ids: list[str] = list(ids or ())
        self._index: dict[str, int] = {node_id: i for i, node_id in enumerate(self._ids)}

    def __len__(self) -> int:
        return len(self._ids)

    @staticmethod
    def canonical(node_id: str) -> str:
        return str(int(node_id)) if INTEGER_ID.fullmatch(node_id) else node_id

    def lookup(self, node_id: str) -> int:
        node_id = self.canonical(node_id)
        index = self._index.get(node_id)
        if index is None:
            index = len(self._ids)
            self._index[node_id] = index
            self._ids.append(node_id)
        return index

    def ids(self) -> tuple[str, ...]:
        return tuple(self._ids)


def load_edge_list(path: Path, options: Optional[IngestOptions] = None) -> Graph:
    """
    Load an undirected edge list.

    Each line holds two node ids separated by whitespace or commas, optionally
    followed by a weight that is ignored. Self-loops are dropped and
    symmetric duplicates merged.

    Args:
        path: Edge-list file
        options: Parsing options

    Returns:
        Validated Graph with compacted node ids

    Raises:
        GraphFormatError: On a malformed line (with its line number)
        EmptyGraphError: If the file holds no edge lines
    """
    options = options or IngestOptions()
    id_map = IdMap()
    pairs: list[tuple[int, int]] = []

    for line_number, fields in _data_lines(path, options):
        if len(fields) < 2 or len(fields) > options.max_fields:
            raise GraphFormatError(
                f"expected 2 to {options.max_fields} fields, got {len(fields)}",
                path=path,
                line_number=line_number,
            )
        if len(fields) >= 3:
            try:
                float(fields[2])
            except ValueError:
                raise GraphFormatError(
                    f"weight field is not numeric: {fields[2]!r}",
                    path=path,
                    line_number=line_number,
                )
        pairs.append((id_map.lookup(fields[0]), id_map.lookup(fields[1])))

    if not pairs:
        raise EmptyGraphError(f"{path} contains no edges")

    graph = Graph.from_pairs(len(id_map), np.array(pairs, dtype=np.int64), id_map=id_map.ids())

    if graph.dropped_self_loops:
        logger.warning(f"Dropped {graph.dropped_self_loops} self-loops from {path}")
    if graph.merged_duplicates:
        logger.info(f"Merged {graph.merged_duplicates} duplicate edges from {path}")
    logger.info(f"Loaded {path}: {graph.n_nodes} nodes, {graph.n_edges} undirected edges")
    return graph


def load_labels(path: Path, graph: Graph, options: Optional[IngestOptions] = None) -> Graph:
    """
    Attach node labels from "node_id class_id" lines.

    Class ids are compacted to 0..C-1 in sorted order. Nodes absent from the
    edge list are appended as isolated nodes; unlabelled nodes get -1.
    """
    options = options or IngestOptions()
    id_map = IdMap(graph.id_map)
    raw: dict[int, str] = {}

    for line_number, fields in _data_lines(path, options):
        if len(fields) != 2:
            raise GraphFormatError(
                f"expected node_id and class_id, got {len(fields)} fields",
                path=path,
                line_number=line_number,
            )
        raw[id_map.lookup(fields[0])] = fields[1]

    graph = graph.with_extra_nodes(list(id_map.ids()[graph.n_nodes :]))
    classes = sorted(set(raw.values()), key=lambda c: (not c.isdigit(), int(c) if c.isdigit() else 0, c))
    class_index = {c: i for i, c in enumerate(classes)}

    labels = np.full(graph.n_nodes, -1, dtype=np.int64)
    for node, cls in raw.items():
        labels[node] = class_index[cls]

    logger.info(f"Loaded {len(raw)} labels over {len(classes)} classes from {path}")
    return graph.with_labels(labels)


def load_features(path: Path, graph: Graph, options: Optional[IngestOptions] = None) -> Graph:
    """
    Attach node features from "node_id x_1 ... x_F" lines.

    Nodes without a feature line get a zero vector.
    """
    options = options or IngestOptions()
    id_map = IdMap(graph.id_map)
    rows: dict[int, list[float]] = {}
    width: Optional[int] = None

    for line_number, fields in _data_lines(path, options):
        values = fields[1:]
        if width is None:
            width = len(values)
        if len(values) != width or width == 0:
            raise GraphFormatError(
                f"expected {width} feature values, got {len(values)}",
                path=path,
                line_number=line_number,
            )
        try:
            rows[id_map.lookup(fields[0])] = [float(v) for v in values]
        except ValueError as e:
            raise GraphFormatError(f"non-numeric feature: {e}", path=path, line_number=line_number)

    if width is None:
        raise GraphFormatError("no feature lines", path=path)

    graph = graph.with_extra_nodes(list(id_map.ids()[graph.n_nodes :]))
    features = np.zeros((graph.n_nodes, width), dtype=np.float64)
    for node, values in rows.items():
        features[node] = values

    logger.info(f"Loaded {width}-dimensional features for {len(rows)} nodes from {path}")
    return graph.with_features(features)

"""Seeded train/val/test partitions of edges and nodes."""

import logging
import math

import numpy as np

from src.core.errors import ConfigurationError
from src.graph.models import EdgeSplit, Graph, NodeSplit

logger = logging.getLogger(__name__)

DEFAULT_EDGE_RATIOS = (0.8, 0.1, 0.1)


def split_sizes(n_items: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    """Floor each share, then give the remainder to train."""
    floors = [math.floor(n_items * r + 1e-9) for r in ratios]
    floors[0] += n_items - sum(floors)
    return floors[0], floors[1], floors[2]


def split_edges(
    g: Graph,
    ratios: tuple[float, float, float] = DEFAULT_EDGE_RATIOS,
    seed: int = 0,
) -> Graph:
    """
    Randomly partition edges into train/val/test.

    Args:
        g: Graph
        ratios: Non-negative train/val/test fractions summing to 1
        seed: Seed of the shuffle

    Returns:
        Graph carrying the EdgeSplit; training code then sees train edges only

    Raises:
        ConfigurationError: If ratios are invalid
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or ratios[0] <= 0:
        raise ConfigurationError(f"Invalid split ratios: {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-6:
        raise ConfigurationError(f"Split ratios must sum to 1, got {sum(ratios)}")

    n_train, n_val, _ = split_sizes(g.n_edges, ratios)
    permutation = np.random.default_rng(seed).permutation(g.n_edges)
    split = EdgeSplit(
        train=np.sort(permutation[:n_train]),
        val=np.sort(permutation[n_train : n_train + n_val]),
        test=np.sort(permutation[n_train + n_val :]),
        seed=seed,
        ratios=tuple(float(r) for r in ratios),
    )
    result = g.with_edge_split(split)

    orphaned = int(np.sum((g.degrees(train=False) > 0) & (result.degrees(train=True) == 0)))
    if orphaned:
        logger.warning(f"{orphaned} nodes lost all their training edges in the split")
    logger.info(
        f"Split {g.n_edges} edges into {len(split.train)}/{len(split.val)}/{len(split.test)} (seed={seed})"
    )
    return result


def split_nodes(
    g: Graph,
    per_class_train: int = 20,
    n_val: int = 500,
    n_test: int = 1000,
    seed: int = 0,
) -> Graph:
    """
    Public-split-style node partition: a fixed number of training nodes per
    class, then validation and test nodes drawn from the remaining labelled nodes.

    Raises:
        ConfigurationError: If the graph has no labels
    """
    if g.labels is None:
        raise ConfigurationError("Graph has no labels; node splits need a label file")

    rng = np.random.default_rng(seed)
    labelled = rng.permutation(np.flatnonzero(g.labels >= 0))

    train: list[int] = []
    for cls in np.unique(g.labels[labelled]):
        members = labelled[g.labels[labelled] == cls]
        train.extend(members[:per_class_train].tolist())

    rest = labelled[~np.isin(labelled, train)]
    val = rest[:n_val]
    test = rest[n_val : n_val + n_test]
    if len(test) < n_test:
        logger.warning(f"Only {len(test)} labelled nodes left for the test split (wanted {n_test})")

    split = NodeSplit(
        train=np.sort(np.array(train, dtype=np.int64)),
        val=np.sort(val),
        test=np.sort(test),
        provenance=f"nodes:per_class={per_class_train},val={n_val},test={n_test},seed={seed}",
    )
    logger.info(f"Split nodes into {len(split.train)}/{len(split.val)}/{len(split.test)} (seed={seed})")
    return g.with_node_split(split)

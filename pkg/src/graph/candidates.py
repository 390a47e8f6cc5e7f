"""Candidate new-edge construction around high-degree nodes."""

import logging

import numpy as np

from src.graph.models import CandidateSet, Graph, pair_keys

logger = logging.getLogger(__name__)

DEFAULT_TOP_K = 2000
DEFAULT_CAP_FACTOR = 50


def degree_order(degrees: np.ndarray) -> np.ndarray:
    """Node ids by degree descending, ties broken by lower id."""
    return np.lexsort((np.arange(len(degrees)), -degrees))


def build_candidate_set(
    g: Graph,
    top_k: int = DEFAULT_TOP_K,
    cap_factor: int = DEFAULT_CAP_FACTOR,
) -> CandidateSet:
    """
    Collect non-edges incident to the top_k highest-degree nodes.

    Degrees and non-edges are taken over the training adjacency. The result
    is capped at cap_factor·|E_train| pairs; when the cap binds, pairs are
    kept in degree-descending order of their anchor node, then of the other
    endpoint. The returned pairs are (i, j) with i < j, sorted
    lexicographically.

    Args:
        g: Graph
        top_k: Number of highest-degree anchor nodes (>= 1)
        cap_factor: Candidate budget per training edge

    Returns:
        CandidateSet (empty for complete graphs)
    """
    n = g.n_nodes
    adjacency = g.train_adjacency
    degrees = g.degrees(train=True)
    order = degree_order(degrees)
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    cap = cap_factor * len(g.train_edges)

    done = np.zeros(n, dtype=bool)
    chunks: list[np.ndarray] = []
    total = 0
    truncated = False

    for anchor in order[: min(top_k, n)]:
        if total >= cap:
            truncated = True
            break
        free = ~done
        free[anchor] = False
        free[adjacency.indices[adjacency.indptr[anchor] : adjacency.indptr[anchor + 1]]] = False
        others = np.flatnonzero(free)
        others = others[np.argsort(rank[others], kind="stable")]
        if total + len(others) > cap:
            others = others[: cap - total]
            truncated = True
        if len(others):
            chunks.append(np.stack([np.minimum(others, anchor), np.maximum(others, anchor)], axis=1))
            total += len(others)
        done[anchor] = True

    if chunks:
        pairs = np.concatenate(chunks)
        pairs = pairs[np.argsort(pair_keys(pairs, n), kind="stable")]
    else:
        pairs = np.empty((0, 2), dtype=np.int64)
    pairs.setflags(write=False)

    if truncated:
        logger.info(f"Candidate set capped at {cap} pairs ({cap_factor} x {len(g.train_edges)} train edges)")
    logger.info(f"Built candidate set: {len(pairs)} pairs around top-{top_k} degree nodes")
    return CandidateSet(pairs=pairs, top_k=top_k, truncated=truncated)

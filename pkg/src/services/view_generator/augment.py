"""Predefined augmentations: edge dropout and edge replacement."""

import logging

import numpy as np
import torch

from src.core.errors import ContractError
from src.graph.models import Graph, canonical_pairs, pair_keys
from src.services.view_generator.models import DiscreteView

logger = logging.getLogger(__name__)

MAX_SAMPLING_ROUNDS = 100


def _keep_mask(n: int, keep_rate: float, rng: torch.Generator) -> np.ndarray:
    return (torch.rand(n, generator=rng, dtype=torch.float64) < keep_rate).numpy()


def dropout_view(g: Graph, keep_rate: float, rng: torch.Generator, draw: int = 0) -> DiscreteView:
    """
    Keep each training edge independently with probability keep_rate.

    Args:
        g: Graph (training edges are used)
        keep_rate: Edge keep probability in (0, 1]
        rng: The "dropout" random stream
        draw: Draw index recorded on the view
    """
    if not 0 < keep_rate <= 1:
        raise ContractError(f"keep_rate must be in (0, 1], got {keep_rate}")
    edges = g.train_edges
    kept = edges[_keep_mask(len(edges), keep_rate, rng)]
    return DiscreteView(pairs=kept, n_nodes=g.n_nodes, kind="dropout", draw=draw)


def sample_non_edges(
    g: Graph,
    count: int,
    rng: torch.Generator,
    exclude: np.ndarray,
) -> np.ndarray:
    """
    Uniformly sample distinct node pairs that are not training edges.

    Pairs whose keys appear in `exclude` are also rejected. Returns fewer
    than `count` pairs only when the graph is too dense to find them.
    """
    n = g.n_nodes
    found = np.empty((0, 2), dtype=np.int64)
    taken = np.asarray(exclude, dtype=np.int64)
    for _ in range(MAX_SAMPLING_ROUNDS):
        missing = count - len(found)
        if missing <= 0 or n < 2:
            break
        draws = torch.randint(0, n, (2 * missing + 16, 2), generator=rng).numpy()
        draws = draws[draws[:, 0] != draws[:, 1]]
        lo = np.minimum(draws[:, 0], draws[:, 1])
        hi = np.maximum(draws[:, 0], draws[:, 1])
        fresh = np.stack([lo, hi], axis=1)
        fresh = fresh[~g.has_train_edges(lo, hi)]
        keys = pair_keys(fresh, n)
        # first occurrence only, in draw order
        _, first = np.unique(keys, return_index=True)
        first = np.sort(first)
        fresh, keys = fresh[first], keys[first]
        fresh = fresh[~np.isin(keys, taken)][:missing]
        found = np.concatenate([found, fresh])
        taken = np.concatenate([taken, pair_keys(fresh, n)])
    if len(found) < count:
        logger.warning(f"Found only {len(found)} of {count} non-edges after {MAX_SAMPLING_ROUNDS} rounds")
    return found


def replacement_view(
    g: Graph,
    keep_rate: float,
    replacement_rate: float,
    rng: torch.Generator,
    draw: int = 0,
) -> DiscreteView:
    """
    Edge dropout, then swap a replacement_rate share of the kept edges for random non-edges.

    With replacement_rate = 0 this is exactly dropout_view on the same stream.
    """
    if not 0 <= replacement_rate < 1:
        raise ContractError(f"replacement_rate must be in [0, 1), got {replacement_rate}")
    base = dropout_view(g, keep_rate, rng, draw)
    n_replace = int(np.floor(replacement_rate * len(base.pairs) + 1e-9))
    if n_replace == 0:
        return DiscreteView(pairs=base.pairs, n_nodes=g.n_nodes, kind="replacement", draw=draw)

    drop = torch.randperm(len(base.pairs), generator=rng).numpy()[:n_replace]
    survivors = np.delete(base.pairs, drop, axis=0)
    added = sample_non_edges(g, n_replace, rng, exclude=np.empty(0, dtype=np.int64))
    pairs, _, _ = canonical_pairs(np.concatenate([survivors, added]), g.n_nodes)
    return DiscreteView(pairs=pairs, n_nodes=g.n_nodes, kind="replacement", draw=draw, n_new=len(added))

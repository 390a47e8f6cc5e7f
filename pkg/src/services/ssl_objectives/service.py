"""Self-supervised objectives: cross-view contrastive loss and BPR."""

import logging
from typing import Optional

import numpy as np
import torch

from src.core.errors import ContractError
from src.diffcore import DTYPE, ops
from src.graph.models import Graph
from src.services.ssl_objectives.models import TripleBatch

logger = logging.getLogger(__name__)

MAX_REJECTIONS = 100
# Anchor columns per chunk of the full softmax, bounded by n·chunk logits
LOGIT_BUDGET = 4_000_000


def _full_contrastive(dp: torch.Tensor, dg: torch.Tensor, tau_f: float) -> torch.Tensor:
    n = dp.shape[0]
    chunk = max(1, LOGIT_BUDGET // max(n, 1))
    total = torch.zeros((), dtype=DTYPE)
    for start in range(0, n, chunk):
        anchors = dg[start : start + chunk]
        # logits[u, v] = dp_u · dg_v / τ_f, normalised over u for each anchor v
        logits = ops.scale(ops.matmul(dp, anchors.T), 1.0 / tau_f)
        positive = ops.scale(ops.dot_rows(dp[start : start + chunk], anchors), 1.0 / tau_f)
        total = total + ops.sum(ops.sub(ops.logsumexp_cols(logits), positive))
    return total


def _sampled_contrastive(
    dp: torch.Tensor,
    dg: torch.Tensor,
    tau_f: float,
    pool_size: int,
    rng: torch.Generator,
) -> torch.Tensor:
    n = dp.shape[0]
    pool = torch.randperm(n, generator=rng)[: min(pool_size, n)]
    positive = ops.scale(ops.dot_rows(dp, dg), 1.0 / tau_f)
    total = torch.zeros((), dtype=DTYPE)
    chunk = max(1, LOGIT_BUDGET // len(pool))
    for start in range(0, n, chunk):
        anchors = torch.arange(start, min(start + chunk, n))
        negatives = ops.scale(ops.matmul(dp[pool], dg[anchors].T), 1.0 / tau_f)
        # the positive is counted once, not again as a pool member
        negatives = negatives.masked_fill(pool[:, None] == anchors[None, :], float("-inf"))
        logits = torch.cat([positive[anchors][None, :], negatives], dim=0)
        total = total + ops.sum(ops.sub(ops.logsumexp_cols(logits), positive[anchors]))
    return total


def contrastive_loss(
    dp: torch.Tensor,
    dg: torch.Tensor,
    tau_f: float,
    negative_pool: Optional[int] = None,
    rng: Optional[torch.Generator] = None,
) -> torch.Tensor:
    """
    Cross-view InfoNCE summed over nodes.

    For each node v the softmax runs over dp_u · dg_v / τ_f for all nodes u
    (or v plus a shared uniform pool of `negative_pool` nodes). Dot products
    are not normalised.

    Args:
        dp: n × D representations of the predefined-augmentation view
        dg: n × D representations of the generated view
        tau_f: Temperature > 0
        negative_pool: Sampled negative-pool size; None uses all nodes
        rng: The "negatives" random stream (required with negative_pool)

    Returns:
        Scalar loss >= 0
    """
    if dp.dim() != 2 or dp.shape != dg.shape:
        raise ContractError(f"contrastive_loss: shapes {tuple(dp.shape)} and {tuple(dg.shape)} differ")
    if tau_f <= 0:
        raise ContractError(f"contrastive_loss: tau_f must be > 0, got {tau_f}")
    if negative_pool is None:
        return _full_contrastive(dp, dg, tau_f)
    if rng is None:
        raise ContractError("contrastive_loss: a sampled negative pool needs an rng stream")
    return _sampled_contrastive(dp, dg, tau_f, negative_pool, rng)


def sample_triples(g: Graph, count: int, rng: torch.Generator) -> TripleBatch:
    """
    Sample BPR triples (i, j, k) from the training graph.

    (i, j) is a uniformly drawn training edge in a uniformly drawn direction;
    k is rejection-sampled uniformly until (i, k) is a non-edge with k != i.
    Triples still unresolved after 100 rounds are skipped.

    Raises:
        ContractError: If the graph has no training edges
    """
    edges = g.train_edges
    if len(edges) == 0:
        raise ContractError("sample_triples: graph has no training edges")
    n = g.n_nodes

    picks = torch.randint(0, len(edges), (count,), generator=rng).numpy()
    flips = torch.randint(0, 2, (count,), generator=rng).numpy().astype(bool)
    i = np.where(flips, edges[picks, 1], edges[picks, 0])
    j = np.where(flips, edges[picks, 0], edges[picks, 1])
    k = np.full(count, -1, dtype=np.int64)

    pending = np.arange(count)
    for _ in range(MAX_REJECTIONS):
        if len(pending) == 0:
            break
        draws = torch.randint(0, n, (len(pending),), generator=rng).numpy()
        ok = (draws != i[pending]) & ~g.has_train_edges(i[pending], draws)
        k[pending[ok]] = draws[ok]
        pending = pending[~ok]

    resolved = k >= 0
    if len(pending):
        logger.warning(f"Skipped {len(pending)} BPR triples with no non-neighbour after {MAX_REJECTIONS} draws")
    triples = np.stack([i[resolved], j[resolved], k[resolved]], axis=1)
    return TripleBatch(triples=triples, requested=count, skipped=int(len(pending)))


def bpr_loss(final: torch.Tensor, batch: TripleBatch) -> torch.Tensor:
    """
    -mean log σ(d_i·d_j - d_i·d_k) over the batch.

    Raises:
        ContractError: If the batch is empty
    """
    if batch.size == 0:
        raise ContractError("bpr_loss: empty triple batch")
    index = torch.as_tensor(batch.triples, dtype=torch.long)
    d_i, d_j, d_k = final[index[:, 0]], final[index[:, 1]], final[index[:, 2]]
    gap = ops.sub(ops.dot_rows(d_i, d_j), ops.dot_rows(d_i, d_k))
    return ops.scale(ops.sum(ops.log_sigmoid(gap)), -1.0 / batch.size)


def ssl_loss(
    gcl: Optional[torch.Tensor],
    bpr: Optional[torch.Tensor],
    lambda_gcl: float,
    lambda_bpr: float,
) -> torch.Tensor:
    """λ_gcl·gcl + λ_bpr·bpr; a missing term counts as zero."""
    loss = torch.zeros((), dtype=DTYPE)
    if gcl is not None and lambda_gcl:
        loss = loss + ops.scale(gcl, lambda_gcl)
    if bpr is not None and lambda_bpr:
        loss = loss + ops.scale(bpr, lambda_bpr)
    return loss

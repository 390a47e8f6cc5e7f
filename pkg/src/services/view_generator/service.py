"""Learnable view generator: relaxed edge sampling over edges plus candidate new edges."""

import logging
from pathlib import Path
from typing import Optional

import numpy as np
import torch
import torch.nn.functional as F
from scipy.stats import rankdata
from torch import nn

from src.core.config import TrainConfig
from src.core.errors import ConfigurationError, ContractError
from src.core.storage import write_table
from src.diffcore import DTYPE, ops
from src.graph.models import CandidateSet, Graph, pair_keys
from src.services.view_generator.models import (
    NeighborhoodEdge,
    RelaxedView,
    ViewNeighborhood,
    ViewStatistics,
)

logger = logging.getLogger(__name__)

N_DEGREE_BUCKETS = 10


def init_weights(n_edges: int, n_candidates: int, lambda_g: float, gamma: float) -> tuple[float, float]:
    """
    Initial generator weights for existing edges and candidate pairs.

    Existing edges start at (1-γ)·λ_g and candidates at γ·λ_g·|E|/|C|, so the
    expected initial candidate mass is a γ share of the target edge count.

    Returns:
        Tuple of (edge weight, candidate weight)

    Raises:
        ConfigurationError: If gamma > 0 with an empty candidate set
    """
    if gamma > 0 and n_candidates == 0:
        raise ConfigurationError("gamma > 0 requires a non-empty candidate set")
    edge_weight = (1.0 - gamma) * lambda_g
    candidate_weight = gamma * lambda_g * n_edges / n_candidates if n_candidates else 0.0
    return edge_weight, candidate_weight


class ViewGenerator(nn.Module):
    """
    Generator parameters: one weight per support pair (training edges plus candidates).

    The support is fixed at construction; pairs outside it never appear in a view.
    """

    def __init__(
        self,
        g: Graph,
        candidates: CandidateSet,
        tau_g: float = 1e-4,
        lambda_g: float = 0.5,
        gamma: float = 0.75,
    ):
        super().__init__()
        if not 0 < tau_g <= 1:
            raise ConfigurationError(f"tau_g must be in (0, 1], got {tau_g}")
        if not 0 <= gamma <= 1:
            raise ConfigurationError(f"gamma must be in [0, 1], got {gamma}")

        edges = g.train_edges
        pairs = np.concatenate([edges, candidates.pairs]) if candidates.size else np.asarray(edges)
        is_candidate = np.concatenate([np.zeros(len(edges), bool), np.ones(candidates.size, bool)])
        keys = pair_keys(pairs, g.n_nodes)
        order = np.argsort(keys, kind="stable")
        if np.any(np.diff(keys[order]) == 0):
            raise ContractError("Candidate set overlaps the training edges")

        self.n_nodes = g.n_nodes
        self.n_edges = len(edges)
        self.tau_g = tau_g
        self.lambda_g = lambda_g
        self.gamma = gamma
        self.register_buffer("pairs", torch.as_tensor(pairs[order], dtype=torch.long))
        self.register_buffer("is_candidate", torch.as_tensor(is_candidate[order]))

        edge_weight, candidate_weight = init_weights(self.n_edges, candidates.size, lambda_g, gamma)
        w = torch.where(
            self.is_candidate,
            torch.full((len(pairs),), candidate_weight, dtype=DTYPE),
            torch.full((len(pairs),), edge_weight, dtype=DTYPE),
        )
        self.w = nn.Parameter(w)
        logger.info(
            f"View generator support: {self.n_edges} edges + {candidates.size} candidates "
            f"(w_edge={edge_weight:.4g}, w_candidate={candidate_weight:.4g})"
        )

    @classmethod
    def from_config(cls, g: Graph, candidates: CandidateSet, cfg: TrainConfig) -> "ViewGenerator":
        return cls(g, candidates, tau_g=cfg.tau_g, lambda_g=cfg.lambda_g, gamma=cfg.gamma)

    @property
    def support(self) -> np.ndarray:
        return self.pairs.numpy()

    @property
    def candidate_mask(self) -> np.ndarray:
        return self.is_candidate.numpy()

    def forward(self, generator: torch.Generator, draw: int = 0) -> RelaxedView:
        return sample_relaxed_view(self, generator, draw)

    def export_support(self, path: Path) -> None:
        """Write the support as (i, j, w, is_candidate) rows."""
        weights = self.w.detach().numpy()
        rows = [
            [int(i), int(j), float(w), int(c)]
            for (i, j), w, c in zip(self.support.tolist(), weights, self.candidate_mask)
        ]
        write_table(path, ["i", "j", "w", "is_candidate"], rows)


def sample_relaxed_view(generator: ViewGenerator, rng: torch.Generator, draw: int = 0) -> RelaxedView:
    """
    Draw one relaxed view p = σ((w - x) / τ_g), x ~ U(0, 1) per support pair.

    p is clamped to [1e-12, 1 - 1e-12] and stays differentiable wrt w; the
    noise x is a constant.
    """
    x = torch.rand(generator.w.shape[0], dtype=DTYPE, generator=rng)
    logits = ops.scale(ops.sub(generator.w, x), 1.0 / generator.tau_g)
    p = ops.clamp_probability(ops.sigmoid(logits))
    return RelaxedView(
        pairs=generator.support,
        p=p,
        is_candidate=generator.candidate_mask,
        n_nodes=generator.n_nodes,
        noise_seed=draw,
    )


def expected_edge_probability(w: torch.Tensor, tau_g: float) -> torch.Tensor:
    """
    Mean of σ((w - x) / τ_g) over x ~ U(0, 1), per support pair.

    Equals τ_g·(softplus(w/τ_g) - softplus((w-1)/τ_g)) and tends to
    clip(w, 0, 1) as τ_g goes to zero.
    """
    w = w.detach().to(DTYPE)
    expected = tau_g * (F.softplus(w / tau_g) - F.softplus((w - 1.0) / tau_g))
    return expected.clamp(0.0, 1.0)


def edge_count_loss(view: RelaxedView, g: Graph, lambda_g: float) -> torch.Tensor:
    """|λ_g·|E_train| - Σp| with each unordered pair counted once."""
    target = torch.tensor(lambda_g * len(g.train_edges), dtype=DTYPE)
    return ops.abs(ops.sub(target, ops.sum(view.p)))


def new_edge_loss(view: RelaxedView) -> torch.Tensor:
    """Total relaxed mass on candidate (non-edge) pairs."""
    mask = torch.as_tensor(view.is_candidate)
    return ops.sum(view.p[mask])


def regularization_loss(
    view: RelaxedView,
    g: Graph,
    lambda_cnt: float,
    lambda_new: float,
    lambda_g: float,
) -> torch.Tensor:
    """λ_cnt·L_cnt + λ_new·L_new; zero-weighted terms are not computed."""
    loss = torch.zeros((), dtype=DTYPE)
    if lambda_cnt:
        loss = loss + ops.scale(edge_count_loss(view, g, lambda_g), lambda_cnt)
    if lambda_new:
        loss = loss + ops.scale(new_edge_loss(view), lambda_new)
    return loss


def degree_buckets(degrees: np.ndarray, n_buckets: int = N_DEGREE_BUCKETS) -> np.ndarray:
    """Bucket index per node by degree rank (ties share a bucket), 0 = lowest degrees."""
    if len(degrees) == 0:
        return np.empty(0, dtype=np.int64)
    ranks = rankdata(degrees, method="min") - 1
    return np.minimum((ranks * n_buckets) // len(degrees), n_buckets - 1).astype(np.int64)


def view_statistics(view: RelaxedView, g: Graph, threshold: float = 0.5) -> ViewStatistics:
    """
    Count support pairs with p >= threshold.

    Every kept new edge adds one count to the degree bucket of each endpoint.
    """
    if not 0 < threshold < 1:
        raise ContractError(f"threshold must be in (0, 1), got {threshold}")
    kept = view.thresholded(threshold)
    new_mask = kept & view.is_candidate
    buckets = degree_buckets(g.degrees(train=True))
    endpoints = view.pairs[new_mask].reshape(-1)
    by_bucket = np.bincount(buckets[endpoints], minlength=N_DEGREE_BUCKETS)
    return ViewStatistics(
        threshold=threshold,
        edges=float(kept.sum()),
        existing=float((kept & ~view.is_candidate).sum()),
        new=float(new_mask.sum()),
        new_by_degree_bucket=[float(c) for c in by_bucket],
    )


def average_view_statistics(
    generator: ViewGenerator,
    g: Graph,
    rng: torch.Generator,
    n_views: int = 10,
    threshold: float = 0.5,
) -> ViewStatistics:
    """Mean thresholded counts over n_views fresh views."""
    samples = []
    with torch.no_grad():
        for draw in range(n_views):
            samples.append(view_statistics(sample_relaxed_view(generator, rng, draw), g, threshold))
    return ViewStatistics(
        threshold=threshold,
        n_views=n_views,
        edges=float(np.mean([s.edges for s in samples])),
        existing=float(np.mean([s.existing for s in samples])),
        new=float(np.mean([s.new for s in samples])),
        new_by_degree_bucket=np.mean([s.new_by_degree_bucket for s in samples], axis=0).tolist(),
    )


def view_neighborhood(
    view: RelaxedView,
    g: Graph,
    node: int,
    threshold: float = 0.5,
    limit: Optional[int] = None,
) -> ViewNeighborhood:
    """Edges around one node: kept and dropped training edges, added candidates."""
    if not 0 <= node < g.n_nodes:
        raise ContractError(f"node {node} outside 0..{g.n_nodes - 1}")
    incident = (view.pairs[:, 0] == node) | (view.pairs[:, 1] == node)
    kept = view.thresholded(threshold)
    p = view.p.detach().numpy()

    def collect(mask: np.ndarray) -> list[NeighborhoodEdge]:
        index = np.flatnonzero(mask)
        index = index[np.argsort(-p[index], kind="stable")][:limit]
        return [
            NeighborhoodEdge(source=node, target=int(view.pairs[k].sum() - node), p=float(p[k]))
            for k in index
        ]

    existing = incident & ~view.is_candidate
    return ViewNeighborhood(
        node=node,
        threshold=threshold,
        kept=collect(existing & kept),
        dropped=collect(existing & ~kept),
        added=collect(incident & view.is_candidate & kept),
    )

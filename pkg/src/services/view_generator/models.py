"""Views and view statistics."""

from dataclasses import dataclass
from typing import Literal

import numpy as np
import torch
from pydantic import BaseModel

from src.diffcore import DTYPE, SparseMatrix


@dataclass(frozen=True, eq=False)
class RelaxedView:
    """
    Generator view: one relaxed edge weight in (0, 1) per support pair.

    `p` keeps its autograd link to the generator weights.
    """

    pairs: np.ndarray
    p: torch.Tensor
    is_candidate: np.ndarray
    n_nodes: int
    noise_seed: int

    def adjacency(self) -> SparseMatrix:
        return SparseMatrix.symmetric(self.pairs, self.p, self.n_nodes)

    def thresholded(self, threshold: float = 0.5) -> np.ndarray:
        """Boolean mask of support pairs with p >= threshold."""
        return self.p.detach().numpy() >= threshold


@dataclass(frozen=True, eq=False)
class DiscreteView:
    """Predefined-augmentation view: a plain edge subset with binary weights."""

    pairs: np.ndarray
    n_nodes: int
    kind: Literal["dropout", "replacement"]
    draw: int
    n_new: int = 0

    def adjacency(self) -> SparseMatrix:
        weights = torch.ones(len(self.pairs), dtype=DTYPE)
        return SparseMatrix.symmetric(self.pairs, weights, self.n_nodes)


class ViewStatistics(BaseModel):
    """Thresholded edge counts of generated views."""

    threshold: float
    n_views: int = 1
    edges: float
    existing: float
    new: float
    # New-edge endpoints per train-degree decile (lowest degrees first)
    new_by_degree_bucket: list[float]


class NeighborhoodEdge(BaseModel):
    source: int
    target: int
    p: float


class ViewNeighborhood(BaseModel):
    """Kept, dropped and added edges around one node in a generated view."""

    node: int
    threshold: float
    kept: list[NeighborhoodEdge]
    dropped: list[NeighborhoodEdge]
    added: list[NeighborhoodEdge]

"""LightGCN-style propagation and the trainable embedding table."""

import logging
from pathlib import Path
from typing import Literal, Optional

import numpy as np
import torch
from torch import nn

from src.core.errors import ContractError
from src.core.storage import atomic_write_text
from src.diffcore import DTYPE, SparseMatrix, ops
from src.graph.models import Graph
from src.services.encoder.models import EncoderOutput

logger = logging.getLogger(__name__)


def normalize_adjacency(adj: SparseMatrix) -> SparseMatrix:
    """
    Symmetric degree normalisation D^-1/2 · A · D^-1/2.

    Args:
        adj: Symmetric-support adjacency with non-negative (possibly
            differentiable) weights

    Returns:
        Normalised SparseMatrix on the same support; rows of zero-degree
        nodes are zero

    Raises:
        ContractError: If any weight is negative
    """
    if adj.nnz and (adj.values.detach() < 0).any():
        raise ContractError("normalize_adjacency: negative edge weight")
    degree = adj.row_sums()
    positive = degree > 0
    # pow on masked-out zeros would put inf into the backward pass
    safe = torch.where(positive, degree, torch.ones_like(degree))
    inv_sqrt = torch.where(positive, safe.pow(-0.5), torch.zeros_like(degree))
    rows = torch.as_tensor(adj.rows, dtype=torch.long)
    cols = torch.as_tensor(adj.cols, dtype=torch.long)
    return adj.with_values(inv_sqrt[rows] * adj.values * inv_sqrt[cols])


def encode(table: torch.Tensor, adj_norm: SparseMatrix, layers: int) -> EncoderOutput:
    """
    Propagate the table over a normalised adjacency and average the layers.

    Args:
        table: n × D layer-0 representations
        adj_norm: Normalised adjacency (see normalize_adjacency)
        layers: Number of propagation layers L >= 0

    Returns:
        EncoderOutput with L+1 layers and their arithmetic mean
    """
    if layers < 0:
        raise ContractError(f"encode: layer count must be >= 0, got {layers}")
    if table.dim() != 2 or table.shape[0] != adj_norm.shape[0]:
        raise ContractError(
            f"encode: table shape {tuple(table.shape)} does not match adjacency {adj_norm.shape}"
        )
    operator = adj_norm.to_torch()
    per_layer = [table]
    for _ in range(layers):
        per_layer.append(ops.spmm(operator, per_layer[-1]))
    final = torch.stack(per_layer, dim=0).mean(dim=0)
    return EncoderOutput(per_layer=per_layer, final=final)


def train_operator(g: Graph) -> SparseMatrix:
    """Normalised binary adjacency of the training edges."""
    return normalize_adjacency(SparseMatrix.from_scipy(g.train_adjacency))


def feature_projection(features: np.ndarray, dim: int, std: float, generator: torch.Generator) -> torch.Tensor:
    """
    Random linear map of L2-normalised features to `dim` columns.

    Entries of the result have standard deviation about `std`, the same
    scale as the random-normal initialisation.
    """
    x = torch.as_tensor(features, dtype=DTYPE)
    norms = x.norm(dim=1, keepdim=True)
    x = x / torch.where(norms > 0, norms, torch.ones_like(norms))
    projection = torch.randn(x.shape[1], dim, dtype=DTYPE, generator=generator)
    return std * (x @ projection)


class EmbeddingTable(nn.Module):
    """Trainable layer-0 node representations shared by every component."""

    def __init__(self, n_nodes: int, dim: int):
        super().__init__()
        if n_nodes < 1 or dim < 1:
            raise ContractError(f"EmbeddingTable needs n_nodes >= 1 and dim >= 1, got {n_nodes}, {dim}")
        self.table = nn.Parameter(torch.zeros(n_nodes, dim, dtype=DTYPE))

    @property
    def n_nodes(self) -> int:
        return self.table.shape[0]

    @property
    def dim(self) -> int:
        return self.table.shape[1]

    @classmethod
    def initialize(
        cls,
        g: Graph,
        dim: int,
        generator: torch.Generator,
        std: float = 0.1,
        use_features: bool = True,
    ) -> "EmbeddingTable":
        """
        Random normal init, or a feature projection when the graph has features.

        Args:
            g: Graph (node count, optional features)
            dim: Embedding dimension D
            generator: The "init" random stream
            std: Standard deviation of the initial entries
            use_features: Project features when present
        """
        module = cls(g.n_nodes, dim)
        with torch.no_grad():
            if use_features and g.features is not None:
                module.table.copy_(feature_projection(g.features, dim, std, generator))
                logger.info(f"Initialised {g.n_nodes}x{dim} embeddings from {g.features.shape[1]} features")
            else:
                module.table.copy_(torch.randn(g.n_nodes, dim, dtype=DTYPE, generator=generator) * std)
                logger.info(f"Initialised {g.n_nodes}x{dim} embeddings (normal, std={std})")
        return module

    def forward(self, adj_norm: SparseMatrix, layers: int) -> EncoderOutput:
        return encode(self.table, adj_norm, layers)


def export_embeddings(
    embeddings: torch.Tensor,
    id_map: tuple[str, ...],
    path: Path,
    fmt: Literal["tsv", "npy"] = "tsv",
) -> Path:
    """
    Write one row per original node id.

    The tsv format holds the original id then D values; npy holds the bare
    matrix in compact-id order (pair it with the dataset's id_map.tsv).
    """
    matrix = embeddings.detach().cpu().numpy()
    if matrix.shape[0] != len(id_map):
        raise ContractError(f"{matrix.shape[0]} embedding rows for {len(id_map)} node ids")
    if fmt == "npy":
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            np.save(f, matrix)
    else:
        lines = (node_id + "\t" + "\t".join(repr(v) for v in row) for node_id, row in zip(id_map, matrix.tolist()))
        atomic_write_text(path, "\n".join(lines) + "\n")
    logger.info(f"Exported {matrix.shape[0]}x{matrix.shape[1]} embeddings to {path}")
    return path


def load_exported_embeddings(path: Path, n_nodes: Optional[int] = None) -> np.ndarray:
    """Read embeddings written by export_embeddings (tsv or npy)."""
    if path.suffix == ".npy":
        matrix = np.load(path)
    else:
        rows = [line.split("\t")[1:] for line in path.read_text(encoding="utf-8").splitlines() if line]
        matrix = np.array(rows, dtype=np.float64)
    if n_nodes is not None and matrix.shape[0] != n_nodes:
        raise ContractError(f"{path} holds {matrix.shape[0]} rows, expected {n_nodes}")
    return matrix

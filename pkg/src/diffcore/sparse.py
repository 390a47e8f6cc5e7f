"""Weighted sparse operator with differentiable values."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import torch

from src.core.errors import ContractError, NumericError

DTYPE = torch.float64


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """
    Sparse matrix in row-major order: entries sorted by (row, col), no duplicates.

    `values` is a float64 torch tensor and may carry autograd history, so a
    relaxed view built from generator weights stays differentiable.
    """

    rows: np.ndarray
    cols: np.ndarray
    values: torch.Tensor
    shape: tuple[int, int]

    def __post_init__(self) -> None:
        if not (len(self.rows) == len(self.cols) == self.values.shape[0]) or self.values.dim() != 1:
            raise ContractError("SparseMatrix: rows, cols and values must have equal length")
        if len(self.rows):
            if self.rows.min() < 0 or self.rows.max() >= self.shape[0]:
                raise ContractError("SparseMatrix: row index out of range")
            if self.cols.min() < 0 or self.cols.max() >= self.shape[1]:
                raise ContractError("SparseMatrix: column index out of range")
            keys = self.rows.astype(np.int64) * self.shape[1] + self.cols
            if np.any(np.diff(keys) <= 0):
                raise ContractError("SparseMatrix: entries must be sorted by (row, col) without duplicates")
        if not torch.isfinite(self.values.detach()).all():
            raise NumericError("SparseMatrix", "values contain NaN or Inf")

    @classmethod
    def from_triplets(
        cls,
        rows: np.ndarray,
        cols: np.ndarray,
        values: torch.Tensor,
        shape: tuple[int, int],
    ) -> "SparseMatrix":
        """Sort arbitrary-order triplets into row-major order."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if not isinstance(values, torch.Tensor):
            values = torch.as_tensor(np.asarray(values, dtype=np.float64))
        order = np.lexsort((cols, rows))
        return cls(
            rows=rows[order],
            cols=cols[order],
            values=values.to(DTYPE)[torch.as_tensor(order, dtype=torch.long)],
            shape=(int(shape[0]), int(shape[1])),
        )

    @classmethod
    def symmetric(cls, pairs: np.ndarray, weights: torch.Tensor, n_nodes: int) -> "SparseMatrix":
        """Mirror one weight per unordered (i<j) pair into both directions."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if len(pairs) != weights.shape[0]:
            raise ContractError("symmetric: one weight per pair required")
        rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
        return cls.from_triplets(rows, cols, torch.cat([weights, weights]), (n_nodes, n_nodes))

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        index = np.arange(n, dtype=np.int64)
        return cls(rows=index, cols=index.copy(), values=torch.ones(n, dtype=DTYPE), shape=(n, n))

    @classmethod
    def from_scipy(cls, matrix: sp.spmatrix) -> "SparseMatrix":
        coo = sp.coo_matrix(matrix)
        coo.sum_duplicates()
        return cls.from_triplets(coo.row, coo.col, torch.as_tensor(coo.data, dtype=DTYPE), coo.shape)

    @property
    def nnz(self) -> int:
        return len(self.rows)

    @property
    def indptr(self) -> np.ndarray:
        """CSR row pointer."""
        return np.concatenate([[0], np.cumsum(np.bincount(self.rows, minlength=self.shape[0]))])

    def with_values(self, values: torch.Tensor) -> "SparseMatrix":
        return SparseMatrix(rows=self.rows, cols=self.cols, values=values, shape=self.shape)

    def row_sums(self) -> torch.Tensor:
        """Differentiable row sums."""
        index = torch.as_tensor(self.rows, dtype=torch.long)
        return torch.zeros(self.shape[0], dtype=DTYPE).index_add(0, index, self.values)

    def to_torch(self) -> torch.Tensor:
        indices = torch.as_tensor(np.stack([self.rows, self.cols]), dtype=torch.long)
        return torch.sparse_coo_tensor(indices, self.values, self.shape, dtype=DTYPE).coalesce()

    def to_dense(self) -> torch.Tensor:
        return self.to_torch().to_dense()

    def to_scipy(self, values: Optional[np.ndarray] = None) -> sp.csr_matrix:
        data = self.values.detach().numpy() if values is None else values
        return sp.csr_matrix((data, (self.rows, self.cols)), shape=self.shape)

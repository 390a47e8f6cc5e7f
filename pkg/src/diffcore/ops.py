"""
Checked differentiable operations over float64 torch tensors.

Every op validates shapes on entry and rejects NaN/Inf results, naming
itself in the raised NumericError. Gradients come from torch autograd.
"""

import logging
from typing import Sequence, Union

import numpy as np
import torch
import torch.nn.functional as F

from src.core.errors import ContractError, NumericError
from src.diffcore.sparse import SparseMatrix

logger = logging.getLogger(__name__)

DTYPE = torch.float64
PROB_EPS = 1e-12

Tensor = torch.Tensor
ArrayLike = Union[Tensor, np.ndarray, Sequence[float], float]


def tensor(values: ArrayLike, requires_grad: bool = False) -> Tensor:
    """Create a float64 leaf tensor."""
    if isinstance(values, Tensor):
        out = values.detach().to(DTYPE).clone()
    else:
        out = torch.as_tensor(np.asarray(values, dtype=np.float64), dtype=DTYPE).clone()
    if not torch.isfinite(out).all():
        raise NumericError("tensor", "input contains NaN or Inf")
    return out.requires_grad_(requires_grad)


def zeros(*shape: int, requires_grad: bool = False) -> Tensor:
    return torch.zeros(*shape, dtype=DTYPE, requires_grad=requires_grad)


def _checked(op: str, out: Tensor) -> Tensor:
    if not torch.isfinite(out).all():
        raise NumericError(op)
    return out


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ContractError(f"{op}: shape mismatch {tuple(a.shape)} vs {tuple(b.shape)}")


def _ndim(op: str, a: Tensor, ndim: int) -> None:
    if a.dim() != ndim:
        raise ContractError(f"{op}: expected a {ndim}-d input, got shape {tuple(a.shape)}")


# Linear algebra


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.dim() not in (1, 2) or b.dim() not in (1, 2) or a.shape[-1] != b.shape[0]:
        raise ContractError(f"matmul: incompatible shapes {tuple(a.shape)} @ {tuple(b.shape)}")
    return _checked("matmul", a @ b)


def spmm(s: Union[SparseMatrix, Tensor], d: Tensor) -> Tensor:
    """Sparse (weighted adjacency) times dense; differentiable wrt d and the sparse values."""
    sparse = s.to_torch() if isinstance(s, SparseMatrix) else s
    if not sparse.is_sparse:
        raise ContractError("spmm: left operand must be sparse")
    _ndim("spmm", d, 2)
    if sparse.shape[1] != d.shape[0]:
        raise ContractError(f"spmm: incompatible shapes {tuple(sparse.shape)} @ {tuple(d.shape)}")
    return _checked("spmm", torch.sparse.mm(sparse, d))


# Elementwise


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)
    return _checked("add", a + b)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("sub", a, b)
    return _checked("sub", a - b)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)
    return _checked("mul", a * b)


def scale(a: Tensor, c: float) -> Tensor:
    return _checked("scale", a * c)


def sigmoid(a: Tensor) -> Tensor:
    return _checked("sigmoid", torch.sigmoid(a))


def log(a: Tensor) -> Tensor:
    """Natural log; inputs must be strictly positive (callers clamp probabilities)."""
    if (a.detach() <= 0).any():
        raise ContractError("log: input must be strictly positive")
    return _checked("log", torch.log(a))


def exp(a: Tensor) -> Tensor:
    return _checked("exp", torch.exp(a))


def abs(a: Tensor) -> Tensor:  # noqa: A001
    """Absolute value with subgradient 0 at 0."""
    return _checked("abs", torch.abs(a))


def clamp_probability(p: Tensor) -> Tensor:
    """Clamp into [1e-12, 1 - 1e-12] so logs of probabilities stay finite."""
    return _checked("clamp_probability", p.clamp(PROB_EPS, 1.0 - PROB_EPS))


def log_sigmoid(a: Tensor) -> Tensor:
    return _checked("log_sigmoid", F.logsigmoid(a))


# Reductions and shape ops


def sum(a: Tensor) -> Tensor:  # noqa: A001
    return _checked("sum", a.sum())


def concat(a: Tensor, b: Tensor) -> Tensor:
    """Concatenate along the last axis."""
    if a.dim() != b.dim() or a.shape[:-1] != b.shape[:-1]:
        raise ContractError(f"concat: incompatible shapes {tuple(a.shape)} and {tuple(b.shape)}")
    return _checked("concat", torch.cat([a, b], dim=-1))


def row_mean(a: Tensor) -> Tensor:
    """Mean over rows (nodes) of an n×D matrix, giving a D-vector."""
    _ndim("row_mean", a, 2)
    if a.shape[0] == 0:
        raise ContractError("row_mean: empty input")
    return _checked("row_mean", a.mean(dim=0))


def row_max(a: Tensor) -> Tensor:
    """
    Max over rows (nodes) of an n×D matrix.

    The gradient goes to the first row attaining the max in each column.
    """
    _ndim("row_max", a, 2)
    if a.shape[0] == 0:
        raise ContractError("row_max: empty input")
    # argmax returns the first maximal index; gather routes gradient only there
    index = torch.argmax(a.detach(), dim=0, keepdim=True)
    return _checked("row_max", a.gather(0, index).squeeze(0))


def softmax_rows(a: Tensor) -> Tensor:
    """Row-wise softmax with max subtraction."""
    _ndim("softmax_rows", a, 2)
    return _checked("softmax_rows", torch.softmax(a, dim=1))


def logsumexp_cols(a: Tensor) -> Tensor:
    """Column-wise log-sum-exp of an m×n matrix, giving an n-vector."""
    _ndim("logsumexp_cols", a, 2)
    return _checked("logsumexp_cols", torch.logsumexp(a, dim=0))


def dot_rows(a: Tensor, b: Tensor) -> Tensor:
    """Row-wise dot products of two n×D matrices."""
    _ndim("dot_rows", a, 2)
    _same_shape("dot_rows", a, b)
    return _checked("dot_rows", (a * b).sum(dim=1))

"""Differentiable substrate: checked ops, weighted sparse operator, gradient checks."""

from src.diffcore import ops
from src.diffcore.gradcheck import GradientCheckReport, gradient_check
from src.diffcore.ops import DTYPE, PROB_EPS, tensor
from src.diffcore.sparse import SparseMatrix

__all__ = [
    "DTYPE",
    "GradientCheckReport",
    "PROB_EPS",
    "SparseMatrix",
    "gradient_check",
    "ops",
    "tensor",
]

"""Finite-difference verification of autograd gradients."""

import logging
from typing import Callable, Optional, Sequence

import numpy as np
import torch
from pydantic import BaseModel

logger = logging.getLogger(__name__)

# Relative errors are measured against max(|analytic|, |numeric|, floor)
REL_ERROR_FLOOR = 1e-3
# One-sided differences disagreeing by more than this fraction mark a kink
KINK_TOLERANCE = 0.1


class GradientCheckReport(BaseModel):
    """Outcome of one gradient check."""

    max_rel_error: float = 0.0
    worst_param: Optional[int] = None
    worst_index: Optional[list[int]] = None
    checked: int = 0
    skipped: int = 0
    tol: float
    passed: bool = True


def _select_coordinates(
    params: Sequence[torch.Tensor],
    max_coords: Optional[int],
    seed: int,
) -> list[tuple[int, tuple[int, ...]]]:
    coords = [
        (p_index, tuple(int(i) for i in index))
        for p_index, p in enumerate(params)
        for index in np.ndindex(*p.shape)
    ]
    if max_coords is not None and len(coords) > max_coords:
        chosen = np.random.default_rng(seed).choice(len(coords), size=max_coords, replace=False)
        coords = [coords[i] for i in np.sort(chosen)]
    return coords


def _evaluate(f: Callable[[], torch.Tensor]) -> float:
    with torch.no_grad():
        return float(f())


def gradient_check(
    f: Callable[[], torch.Tensor],
    params: Sequence[torch.Tensor],
    eps: float = 1e-4,
    tol: float = 1e-3,
    max_coords: Optional[int] = None,
    seed: int = 0,
) -> GradientCheckReport:
    """
    Compare autograd gradients of a scalar computation against central differences.

    Args:
        f: Zero-argument callable returning a scalar tensor; must be
            deterministic given the current parameter values
        params: Leaf tensors with requires_grad=True, perturbed in place
        eps: Finite-difference step
        tol: Maximum accepted relative error
        max_coords: Check a random subset of this many coordinates
        seed: Seed of the coordinate subset

    Returns:
        GradientCheckReport with the worst coordinate. Coordinates at a
        non-differentiable point (one-sided differences disagree) are skipped.
    """
    params = list(params)
    loss = f()
    grads = torch.autograd.grad(loss, params, allow_unused=True)
    analytic = [torch.zeros_like(p) if g is None else g.detach() for p, g in zip(params, grads)]
    f0 = float(loss.detach())

    report = GradientCheckReport(tol=tol)
    for p_index, index in _select_coordinates(params, max_coords, seed):
        p = params[p_index]
        with torch.no_grad():
            original = p[index].item()
            p[index] = original + eps
        f_plus = _evaluate(f)
        with torch.no_grad():
            p[index] = original - eps
        f_minus = _evaluate(f)
        with torch.no_grad():
            p[index] = original

        forward = (f_plus - f0) / eps
        backward = (f0 - f_minus) / eps
        if abs(forward - backward) > KINK_TOLERANCE * max(1.0, abs(forward), abs(backward)):
            report.skipped += 1
            logger.debug(f"Skipping non-differentiable coordinate {p_index}{list(index)}")
            continue

        numeric = (f_plus - f_minus) / (2 * eps)
        exact = analytic[p_index][index].item()
        rel = abs(exact - numeric) / max(abs(exact), abs(numeric), REL_ERROR_FLOOR)
        report.checked += 1
        if rel > report.max_rel_error or report.worst_param is None:
            report.max_rel_error = rel
            report.worst_param = p_index
            report.worst_index = list(index)

    report.passed = report.max_rel_error < tol
    if not report.passed:
        logger.warning(
            f"Gradient check failed: rel error {report.max_rel_error:.3e} at param "
            f"{report.worst_param}{report.worst_index}"
        )
    return report

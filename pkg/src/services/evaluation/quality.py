"""Where generated new edges attach, by endpoint degree."""

import logging
import warnings
from typing import Literal, Optional, Union

import numpy as np
import torch
from scipy.stats import ConstantInputWarning, spearmanr

from src.core.errors import ContractError
from src.graph.models import Graph
from src.services.evaluation.models import DegreeProfile
from src.services.view_generator import ViewGenerator, degree_buckets, expected_edge_probability, sample_non_edges
from src.services.view_generator.service import N_DEGREE_BUCKETS

logger = logging.getLogger(__name__)


def _profile(
    g: Graph,
    pairs: np.ndarray,
    mass: np.ndarray,
    source: Literal["generator", "random"],
) -> DegreeProfile:
    degrees = g.degrees(train=True)
    buckets = degree_buckets(degrees)
    bucket_max = [int(degrees[buckets == b].max()) if np.any(buckets == b) else 0 for b in range(N_DEGREE_BUCKETS)]
    if len(pairs) == 0:
        return DegreeProfile(
            source=source, n_new_edges=0, total_mass=0.0, bucket_mass=[], bucket_max_degree=[], spearman_rho=None
        )

    node_mass = np.zeros(g.n_nodes)
    np.add.at(node_mass, pairs[:, 0], mass)
    np.add.at(node_mass, pairs[:, 1], mass)
    bucket_mass = np.bincount(buckets, weights=node_mass, minlength=N_DEGREE_BUCKETS)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConstantInputWarning)
        rho = spearmanr(degrees, node_mass).statistic
    return DegreeProfile(
        source=source,
        n_new_edges=int(len(pairs)),
        total_mass=float(mass.sum()),
        bucket_mass=bucket_mass.tolist(),
        bucket_max_degree=bucket_max,
        spearman_rho=None if np.isnan(rho) else float(rho),
    )


def new_edge_degree_profile(
    generator: Union[ViewGenerator, dict],
    g: Graph,
    tau_g: Optional[float] = None,
) -> DegreeProfile:
    """
    Bucket the generator's expected new-edge mass by endpoint train-degree decile.

    A candidate pair's mass is its expected probability of appearing in a
    view under the generator's temperature (clip(w, 0, 1) as τ_g goes to
    zero). Each node collects the mass of its incident candidates; the
    profile reports per-bucket totals and the Spearman correlation between
    node degree and collected mass.

    Args:
        generator: ViewGenerator or its state dict (from a checkpoint)
        g: Graph the generator was trained on
        tau_g: Temperature; defaults to the generator's own, required with a state dict

    Raises:
        ContractError: If a state dict is given without tau_g
    """
    if isinstance(generator, ViewGenerator):
        state = generator.state_dict()
        tau_g = generator.tau_g if tau_g is None else tau_g
    else:
        state = generator
        if tau_g is None:
            raise ContractError("tau_g is required when profiling a generator state dict")
    pairs = state["pairs"].numpy()
    candidate = state["is_candidate"].numpy().astype(bool)
    mass = expected_edge_probability(state["w"], tau_g).numpy()[candidate]
    profile = _profile(g, pairs[candidate], mass, "generator")
    logger.info(f"Generator new-edge profile: mass={profile.total_mass:.2f}, rho={profile.spearman_rho}")
    return profile


def random_new_edge_profile(g: Graph, n_edges: int, seed: int = 0) -> DegreeProfile:
    """Profile of n_edges uniformly random non-edges, each with unit mass."""
    rng = torch.Generator()
    rng.manual_seed(seed)
    pairs = sample_non_edges(g, n_edges, rng, exclude=np.empty(0, dtype=np.int64))
    return _profile(g, pairs, np.ones(len(pairs)), "random")

"""View generator service: relaxed generator views and predefined augmentations."""

from src.services.view_generator.augment import dropout_view, replacement_view, sample_non_edges
from src.services.view_generator.models import DiscreteView, RelaxedView, ViewNeighborhood, ViewStatistics
from src.services.view_generator.service import (
    ViewGenerator,
    average_view_statistics,
    degree_buckets,
    edge_count_loss,
    expected_edge_probability,
    init_weights,
    new_edge_loss,
    regularization_loss,
    sample_relaxed_view,
    view_neighborhood,
    view_statistics,
)

__all__ = [
    "DiscreteView",
    "RelaxedView",
    "ViewGenerator",
    "ViewNeighborhood",
    "ViewStatistics",
    "average_view_statistics",
    "degree_buckets",
    "dropout_view",
    "edge_count_loss",
    "expected_edge_probability",
    "init_weights",
    "new_edge_loss",
    "regularization_loss",
    "replacement_view",
    "sample_non_edges",
    "sample_relaxed_view",
    "view_neighborhood",
    "view_statistics",
]

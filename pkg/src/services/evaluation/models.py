"""Pydantic models for evaluation records, curves and profiles."""

from typing import Literal, Optional

from pydantic import BaseModel, field_validator

Task = Literal["node_classification", "link_prediction"]
Variant = Literal["full", "wo_reg", "wo_gan", "wo_ssl", "wo_gcl", "wo_bpr"]


class MetricsRecord(BaseModel):
    """One evaluation result; written as one JSON line."""

    task: Task
    metrics: dict[str, float]
    seed: int
    config_hash: str
    wall_time: float = 0.0
    part: Literal["val", "test"] = "test"
    variant: Optional[str] = None
    split: Optional[str] = None  # split provenance
    sampled_candidates: bool = False

    @field_validator("metrics")
    @classmethod
    def _in_unit_interval(cls, metrics: dict[str, float]) -> dict[str, float]:
        for name, value in metrics.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"metric {name}={value} outside [0, 1]")
        return metrics


class CurvePoint(BaseModel):
    """One row of the edge-replacement curve."""

    rate: float
    metric: str
    value: float


class SweepRow(BaseModel):
    """One grid point of a sensitivity sweep."""

    param: str
    value: str
    metric: str
    score: float
    eta: float
    config_hash: str


class DegreeProfile(BaseModel):
    """New-edge mass grouped by endpoint train-degree deciles."""

    source: Literal["generator", "random"]
    n_new_edges: int
    total_mass: float
    bucket_mass: list[float]
    # Highest train degree inside each bucket
    bucket_max_degree: list[int]
    spearman_rho: Optional[float] = None

    @property
    def is_empty(self) -> bool:
        return self.n_new_edges == 0

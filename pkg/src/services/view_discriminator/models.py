"""Labelled views for discriminator batches."""

from dataclasses import dataclass
from typing import Union

from src.core.errors import ContractError
from src.services.view_generator.models import DiscreteView, RelaxedView

# Predefined-augmentation views are "real" (1), generator views "fake" (0)
REAL_LABEL = 1
GENERATED_LABEL = 0


@dataclass(frozen=True, eq=False)
class LabeledView:
    view: Union[RelaxedView, DiscreteView]
    label: int

    def __post_init__(self) -> None:
        if self.label not in (REAL_LABEL, GENERATED_LABEL):
            raise ContractError(f"label must be 0 or 1, got {self.label}")

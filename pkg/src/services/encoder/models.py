"""Data containers for the graph encoder."""

from dataclasses import dataclass

import torch


@dataclass(frozen=True, eq=False)
class EncoderOutput:
    """Layer-wise representations and their mean readout."""

    per_layer: list[torch.Tensor]
    final: torch.Tensor

    @property
    def n_layers(self) -> int:
        return len(self.per_layer) - 1

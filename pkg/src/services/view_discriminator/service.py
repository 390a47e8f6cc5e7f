"""Graph-level view discriminator: pooling, MLP scoring and classification losses."""

import logging
import math
from typing import Literal, Optional, Union

import torch
from torch import nn

from src.core.config import TrainConfig
from src.core.errors import ContractError
from src.diffcore import DTYPE, ops
from src.services.encoder.models import EncoderOutput

logger = logging.getLogger(__name__)


def pool_graph(enc: Union[EncoderOutput, torch.Tensor]) -> torch.Tensor:
    """Concatenate mean and max pooling over nodes into a 2·D vector."""
    final = enc.final if isinstance(enc, EncoderOutput) else enc
    if final.dim() != 2 or final.shape[0] == 0:
        raise ContractError("pool_graph: needs at least one node")
    return ops.concat(ops.row_mean(final), ops.row_max(final))


def _glorot_(weight: torch.Tensor, generator: Optional[torch.Generator]) -> None:
    bound = math.sqrt(6.0 / (weight.shape[0] + weight.shape[1]))
    weight.uniform_(-bound, bound, generator=generator)


class ViewDiscriminator(nn.Module):
    """
    MLP scoring a pooled graph representation.

    Hidden layers use ReLU; the single output goes through a sigmoid and is
    clamped away from 0 and 1.
    """

    def __init__(
        self,
        input_width: int,
        hidden_width: int,
        n_layers: int = 2,
        init: Literal["xavier", "zeros"] = "xavier",
        generator: Optional[torch.Generator] = None,
    ):
        super().__init__()
        if n_layers < 1:
            raise ContractError(f"discriminator needs at least one layer, got {n_layers}")
        widths = [input_width] + [hidden_width] * (n_layers - 1) + [1]
        self.layers = nn.ModuleList(
            nn.Linear(widths[i], widths[i + 1], dtype=DTYPE) for i in range(n_layers)
        )
        with torch.no_grad():
            for layer in self.layers:
                layer.bias.zero_()
                if init == "zeros":
                    layer.weight.zero_()
                else:
                    _glorot_(layer.weight, generator)

    @classmethod
    def from_config(cls, cfg: TrainConfig, generator: torch.Generator) -> "ViewDiscriminator":
        return cls(2 * cfg.dim, cfg.hidden_width, cfg.mlp_layers, cfg.mlp_init, generator)

    @property
    def input_width(self) -> int:
        return self.layers[0].in_features

    def logit(self, d_g: torch.Tensor) -> torch.Tensor:
        if d_g.dim() != 1 or d_g.shape[0] != self.input_width:
            raise ContractError(f"discriminate: expected width {self.input_width}, got {tuple(d_g.shape)}")
        h = d_g
        for i, layer in enumerate(self.layers):
            h = layer(h)
            if i < len(self.layers) - 1:
                h = torch.relu(h)
        return h.squeeze(-1)

    def forward(self, d_g: torch.Tensor) -> torch.Tensor:
        return ops.clamp_probability(ops.sigmoid(self.logit(d_g)))


def discriminate(d_g: torch.Tensor, mlp: ViewDiscriminator) -> torch.Tensor:
    """Probability that a pooled view representation comes from predefined augmentation."""
    return mlp(d_g)


def bce_loss(p: torch.Tensor, y: int) -> torch.Tensor:
    """Binary cross-entropy -y·log p - (1-y)·log(1-p) on a clamped probability."""
    if y not in (0, 1):
        raise ContractError(f"bce_loss: label must be 0 or 1, got {y}")
    if y == 1:
        return -ops.log(p)
    return -ops.log(1.0 - p)


def adversarial_loss(p_generated: torch.Tensor) -> torch.Tensor:
    """Generator objective: make the discriminator label its views as real."""
    return bce_loss(p_generated, 1)

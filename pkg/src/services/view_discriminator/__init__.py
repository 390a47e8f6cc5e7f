"""View discriminator service."""

from src.services.view_discriminator.models import GENERATED_LABEL, REAL_LABEL, LabeledView
from src.services.view_discriminator.service import (
    ViewDiscriminator,
    adversarial_loss,
    bce_loss,
    discriminate,
    pool_graph,
)

__all__ = [
    "GENERATED_LABEL",
    "LabeledView",
    "REAL_LABEL",
    "ViewDiscriminator",
    "adversarial_loss",
    "bce_loss",
    "discriminate",
    "pool_graph",
]

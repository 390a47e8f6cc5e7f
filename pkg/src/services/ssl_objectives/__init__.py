"""Self-supervised objectives service."""

from src.services.ssl_objectives.models import TripleBatch
from src.services.ssl_objectives.service import bpr_loss, contrastive_loss, sample_triples, ssl_loss

__all__ = ["TripleBatch", "bpr_loss", "contrastive_loss", "sample_triples", "ssl_loss"]

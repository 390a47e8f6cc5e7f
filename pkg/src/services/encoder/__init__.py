"""Graph encoder service."""

from src.services.encoder.models import EncoderOutput
from src.services.encoder.service import (
    EmbeddingTable,
    encode,
    export_embeddings,
    load_exported_embeddings,
    normalize_adjacency,
    train_operator,
)

__all__ = [
    "EmbeddingTable",
    "EncoderOutput",
    "encode",
    "export_embeddings",
    "load_exported_embeddings",
    "normalize_adjacency",
    "train_operator",
]

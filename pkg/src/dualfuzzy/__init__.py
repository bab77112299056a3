"""Dual fuzzy-set embeddings of partial 3D shapes for complement and interchangeable-part retrieval."""

from .encoder import EmbedConfig, EncoderParams, embed, embed_stack, init_params
from .fuzzy import (
    DualEmbedding,
    complementarity_energy,
    directional_energy,
    fuzzy_join,
    fuzzy_meet,
    interchangeability_energy,
    is_subset,
)
from .training import LossConfig, ranking_loss, threshold_loss, train

__version__ = "0.1.0"

__all__ = [
    "DualEmbedding",
    "EmbedConfig",
    "EncoderParams",
    "LossConfig",
    "complementarity_energy",
    "directional_energy",
    "embed",
    "embed_stack",
    "fuzzy_join",
    "fuzzy_meet",
    "init_params",
    "interchangeability_energy",
    "is_subset",
    "ranking_loss",
    "threshold_loss",
    "train",
]

"""Dataset ingestion, entity masking, vocabularies, embeddings and sampling."""

from .examples import (
    DatasetError,
    EntityMention,
    RelationExample,
    example_to_record,
    mask_entities,
    mask_token,
    parse_dataset,
    parse_record,
    write_dataset,
)
from .sampler import SamplerError, weighted_indices, weighted_sampler
from .vocab import (
    UNK,
    EmbeddingFormatError,
    EmbeddingTable,
    Vocabulary,
    load_embeddings,
    save_embeddings,
    vectorize,
)

__all__ = [
    "DatasetError", "EntityMention", "RelationExample", "example_to_record", "mask_entities",
    "mask_token", "parse_dataset", "parse_record", "write_dataset", "SamplerError",
    "weighted_indices", "weighted_sampler", "UNK", "EmbeddingFormatError", "EmbeddingTable",
    "Vocabulary", "load_embeddings", "save_embeddings", "vectorize",
]

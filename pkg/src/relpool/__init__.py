"""Neural relation extraction with entity, sentence, segment and dependency-path max pooling."""

__version__ = "0.1.0"

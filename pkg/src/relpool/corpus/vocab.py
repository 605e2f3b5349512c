"""Vocabularies, pretrained word vectors and input vectorization."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from ..numeric import Module, parameter
from .examples import RelationExample, mask_entities, mask_token

UNK = "<unk>"

__all__ = [
    "UNK",
    "EmbeddingFormatError",
    "Vocabulary",
    "EmbeddingTable",
    "load_embeddings",
    "save_embeddings",
    "lookup_form",
    "vectorize",
]


class EmbeddingFormatError(ValueError):
    pass


def lookup_form(token: str, mask_tokens: frozenset | set = frozenset()) -> str:
    """Lowercase ordinary tokens; mask tokens are kept verbatim."""
    return token if token in mask_tokens else token.lower()


@dataclass
class Vocabulary:
    words: list[str]
    pos_tags: list[str]
    labels: list[str]
    negative_label: str
    word_index: dict[str, int] = field(init=False, repr=False)
    pos_index: dict[str, int] = field(init=False, repr=False)
    label_index: dict[str, int] = field(init=False, repr=False)
    mask_tokens: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        self.word_index = {w: i for i, w in enumerate(self.words)}
        self.pos_index = {p: i for i, p in enumerate(self.pos_tags)}
        self.label_index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self.word_index) != len(self.words) or len(self.pos_index) != len(self.pos_tags) \
                or len(self.label_index) != len(self.labels):
            raise ValueError("vocabulary entries must be unique")
        if UNK not in self.word_index:
            raise ValueError(f"word vocabulary must contain {UNK}")
        if self.negative_label not in self.label_index:
            raise ValueError(f"label vocabulary must contain the negative label {self.negative_label!r}")
        self.mask_tokens = frozenset(w for w in self.words if w[:3] in ("M1-", "M2-"))

    @classmethod
    def build(cls, train: Iterable[RelationExample], negative_label: str,
              extra: Iterable[RelationExample] = (), pretrained: dict | None = None) -> "Vocabulary":
        """Collect indices from the training split.

        ``extra`` splits contribute their POS tags and labels, and any word
        that has a pretrained vector (it would otherwise be unknown).
        """
        train = list(train)
        extra = list(extra)
        types = sorted({m.entity_type for ex in train for m in (ex.m1, ex.m2)})
        masks = [mask_token(role, t) for t in types for role in (1, 2)]
        mask_set = set(masks)
        words = set()
        for ex in train:
            words.update(lookup_form(t, mask_set) for t in mask_entities(ex))
        if pretrained:
            for ex in extra:
                words.update(w for w in (lookup_form(t, mask_set) for t in mask_entities(ex))
                             if w in pretrained)
        words -= mask_set
        words.discard(UNK)
        pos = sorted({p for ex in train + extra for p in ex.pos_tags})
        labels = sorted({ex.label for ex in train + extra} - {negative_label})
        return cls([UNK] + masks + sorted(words), pos, [negative_label] + labels, negative_label)

    def encode_words(self, ex: RelationExample) -> np.ndarray:
        unk = self.word_index[UNK]
        return np.array([self.word_index.get(lookup_form(t, self.mask_tokens), unk)
                         for t in mask_entities(ex)], dtype=np.int64)

    def encode_pos(self, ex: RelationExample) -> np.ndarray:
        try:
            return np.array([self.pos_index[p] for p in ex.pos_tags], dtype=np.int64)
        except KeyError as exc:
            raise KeyError(f"record {ex.id}: POS tag {exc.args[0]!r} not in the vocabulary") from None

    def encode_label(self, label: str) -> int:
        try:
            return self.label_index[label]
        except KeyError:
            raise KeyError(f"relation label {label!r} not in the vocabulary") from None

    def to_dict(self) -> dict:
        return {"words": self.words, "pos_tags": self.pos_tags, "labels": self.labels,
                "negative_label": self.negative_label}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(list(d["words"]), list(d["pos_tags"]), list(d["labels"]), d["negative_label"])


class EmbeddingTable(Module):
    """Trainable word and POS embedding matrices."""

    def __init__(self, word: np.ndarray, pos: np.ndarray):
        self.word = parameter(word, "embeddings.word")
        self.pos = parameter(pos, "embeddings.pos")

    @classmethod
    def create(cls, vocab: Vocabulary, word_dim: int, pos_dim: int, rng: np.random.Generator,
               pretrained: dict | None = None, dtype=np.float32, scale: float = 0.25) -> "EmbeddingTable":
        """Uniform(-scale, scale) rows, overwritten by pretrained vectors where available."""
        word = rng.uniform(-scale, scale, (len(vocab.words), word_dim))
        pos = rng.uniform(-scale, scale, (len(vocab.pos_tags), pos_dim))
        if pretrained:
            for w, i in vocab.word_index.items():
                vec = pretrained.get(w)
                if vec is not None and w not in vocab.mask_tokens and w != UNK:
                    if len(vec) != word_dim:
                        raise EmbeddingFormatError(f"pretrained vector for {w!r} has dim {len(vec)}, expected {word_dim}")
                    word[i] = vec
        return cls(word.astype(dtype), pos.astype(dtype))

    @property
    def dim(self) -> int:
        return self.word.shape[1] + self.pos.shape[1]


def vectorize(ex: RelationExample, vocab: Vocabulary, embeddings: EmbeddingTable) -> np.ndarray:
    """Per-token input vectors ``concat(word_emb(masked token), pos_emb(tag))``, shape (n, dw+dp)."""
    w = embeddings.word.data[vocab.encode_words(ex)]
    p = embeddings.pos.data[vocab.encode_pos(ex)]
    return np.concatenate([w, p], axis=1)


def load_embeddings(path, dim: int | None = None) -> dict[str, np.ndarray]:
    """Read the word2vec text format: a ``count dim`` header, then ``word v1 .. vdim`` lines."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or not all(h.isdigit() for h in header):
            raise EmbeddingFormatError(f"{path}:1: expected header 'count dim', got {' '.join(header)!r}")
        count, file_dim = int(header[0]), int(header[1])
        if dim is not None and file_dim != dim:
            raise EmbeddingFormatError(f"{path}: file dimension {file_dim} != configured embedding dim {dim}")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").rstrip().split(" ")
            if len(parts) == 1 and not parts[0]:
                continue
            word, values = parts[0], parts[1:]
            if len(values) != file_dim:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: {word!r} has {len(values)} values, header says {file_dim}")
            try:
                vec = np.array(values, dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(f"{path}:{lineno}: non-numeric value for {word!r}") from None
            if word in vectors:
                warnings.warn(f"{path}:{lineno}: duplicate word {word!r}; keeping the last vector",
                              stacklevel=2)
            vectors[word] = vec
    if len(vectors) != count:
        warnings.warn(f"{path}: header announces {count} words, read {len(vectors)}", stacklevel=2)
    return vectors


def save_embeddings(path, vectors: dict[str, np.ndarray]) -> None:
    items = list(vectors.items())
    dim = len(items[0][1]) if items else 0
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"{len(items)} {dim}\n")
        for word, vec in items:
            fh.write(word + " " + " ".join(repr(float(x)) for x in vec) + "\n")

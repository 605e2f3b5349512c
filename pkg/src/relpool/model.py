"""Embedding -> encoder -> pooling -> feed-forward relation classifier."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import ExperimentConfig
from .corpus import EmbeddingTable, RelationExample, Vocabulary
from .encoders import build_encoder, normalized_adjacency
from .numeric import Module, Tensor, dropout, no_grad, parameter
from .numeric import ops
from .pooling import PoolingPlan, needs_tree, output_dim, plan, plan_masks, pool_batch
from .syntax import gcn_adjacency, path_sets

_DTYPES = {"float32": np.float32, "float64": np.float64}


@dataclass
class EncodedExample:
    id: str
    word_ids: np.ndarray
    pos_ids: np.ndarray
    label: int
    plan: PoolingPlan
    adjacency: np.ndarray | None


@dataclass
class Batch:
    ids: list[str]
    word_ids: np.ndarray  # (B, T)
    pos_ids: np.ndarray  # (B, T)
    mask: np.ndarray  # (B, T) bool
    pool_masks: np.ndarray  # (B, S, T) bool
    adjacency: np.ndarray | None  # (B, T, T)
    labels: np.ndarray  # (B,)


class RelationClassifier(Module):
    def __init__(self, vocab: Vocabulary, config: ExperimentConfig, rng: np.random.Generator,
                 pretrained: dict | None = None):
        self.vocab = vocab
        self.config = config
        dtype = _DTYPES[config.precision]
        self.dtype = dtype
        self.embeddings = EmbeddingTable.create(vocab, config.word_dim, config.pos_dim, rng,
                                                pretrained, dtype, config.embedding_init)
        self.encoder = build_encoder(config.encoder_config(), self.embeddings.dim, rng, dtype)
        f_dim = output_dim(config.pooling, self.encoder.out_dim)
        self.feature_dim = f_dim
        n_labels = len(vocab.labels)
        bound = np.sqrt(6.0 / (f_dim + config.ff_hidden))
        self.hidden_w = parameter(rng.uniform(-bound, bound, (f_dim, config.ff_hidden)).astype(dtype))
        self.hidden_b = parameter(np.zeros(config.ff_hidden, dtype=dtype))
        bound = np.sqrt(6.0 / (config.ff_hidden + n_labels))
        self.out_w = parameter(rng.uniform(-bound, bound, (config.ff_hidden, n_labels)).astype(dtype))
        self.out_b = parameter(np.zeros(n_labels, dtype=dtype))
        for name, p in self.named_parameters():
            p.name = name

    @property
    def uses_tree(self) -> bool:
        return self.config.encoder == "BiLSTM-GCN"

    def encode(self, ex: RelationExample) -> EncodedExample:
        tree = ex.tree
        ps = path_sets(tree, ex.m1.span, ex.m2.span) if needs_tree(self.config.pooling) else None
        return EncodedExample(
            id=ex.id,
            word_ids=self.vocab.encode_words(ex),
            pos_ids=self.vocab.encode_pos(ex),
            label=self.vocab.encode_label(ex.label),
            plan=plan(self.config.pooling, ex.n, ex.m1.span, ex.m2.span, ps),
            adjacency=gcn_adjacency(tree)[0] if self.uses_tree else None,
        )

    def batch(self, encoded: Sequence[EncodedExample]) -> Batch:
        T = max(len(e.word_ids) for e in encoded)
        B = len(encoded)
        word = np.zeros((B, T), dtype=np.int64)
        pos = np.zeros((B, T), dtype=np.int64)
        mask = np.zeros((B, T), dtype=bool)
        for b, e in enumerate(encoded):
            n = len(e.word_ids)
            word[b, :n] = e.word_ids
            pos[b, :n] = e.pos_ids
            mask[b, :n] = True
        adjacency = None
        if self.uses_tree:
            adjacency = normalized_adjacency([e.adjacency for e in encoded], T, self.dtype)
        return Batch([e.id for e in encoded], word, pos, mask, plan_masks([e.plan for e in encoded], T),
                     adjacency, np.array([e.label for e in encoded], dtype=np.int64))

    def logits(self, batch: Batch, training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        cfg = self.config
        words = dropout(ops.embedding(self.embeddings.word, batch.word_ids), cfg.word_dropout, training, rng)
        tags = ops.embedding(self.embeddings.pos, batch.pos_ids)
        v = ops.concat([words, tags], axis=-1)
        a = self.encoder(v, batch.mask, batch.adjacency, training=training, rng=rng)
        f = dropout(pool_batch(a, batch.pool_masks), cfg.dropout, training, rng)
        h = ops.relu(ops.add(ops.matmul(f, self.hidden_w), self.hidden_b))
        return ops.add(ops.matmul(h, self.out_w), self.out_b)

    def loss(self, batch: Batch, training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        return ops.nll_loss(ops.log_softmax(self.logits(batch, training, rng)), batch.labels)

    def probabilities(self, batch: Batch) -> np.ndarray:
        with no_grad():
            return ops.softmax(self.logits(batch)).data

    def predict_proba(self, examples: Sequence[RelationExample], batch_size: int = 64) -> np.ndarray:
        encoded = [self.encode(ex) for ex in examples]
        return self.predict_encoded(encoded, batch_size)

    def predict_encoded(self, encoded: Sequence[EncodedExample], batch_size: int = 64) -> np.ndarray:
        out = [self.probabilities(self.batch(encoded[i:i + batch_size]))
               for i in range(0, len(encoded), batch_size)]
        return np.concatenate(out, axis=0) if out else np.zeros((0, len(self.vocab.labels)))

    def predict(self, examples: Sequence[RelationExample]) -> list[str]:
        probs = self.predict_proba(examples)
        return [self.vocab.labels[i] for i in probs.argmax(axis=1)]


def forward(model: RelationClassifier, example: RelationExample) -> np.ndarray:
    """Probability vector over relation labels for a single example."""
    return model.predict_proba([example])[0]

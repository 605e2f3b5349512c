"""Class-balanced sampling for imbalanced relation data."""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from .examples import RelationExample


class SamplerError(ValueError):
    pass


def weighted_indices(labels: Sequence[str], negative_label: str, seed: int,
                     chunk: int = 4096) -> Iterator[int]:
    """Endless stream of example indices, half negative and half positive in expectation.

    Within each class every example is equally likely.
    """
    labels = list(labels)
    neg = np.array([i for i, lab in enumerate(labels) if lab == negative_label], dtype=np.int64)
    pos = np.array([i for i, lab in enumerate(labels) if lab != negative_label], dtype=np.int64)
    if len(neg) == 0 or len(pos) == 0:
        raise SamplerError(
            "weighted sampling needs both positive and negative examples; "
            "disable weighted_sampling for single-class data")
    rng = np.random.default_rng(seed)
    while True:
        pick_pos = rng.random(chunk) < 0.5
        from_pos = pos[rng.integers(0, len(pos), chunk)]
        from_neg = neg[rng.integers(0, len(neg), chunk)]
        yield from np.where(pick_pos, from_pos, from_neg).tolist()


def weighted_sampler(examples: Sequence[RelationExample], seed: int,
                     negative_label: str = "no_relation") -> Iterator[RelationExample]:
    for i in weighted_indices([ex.label for ex in examples], negative_label, seed):
        yield examples[i]

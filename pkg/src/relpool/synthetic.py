"""Small generated corpora with hand-built dependency parses.

Each sentence follows one of a few templates in which a trigger word,
adjacent to a mention and on the dependency path between the mentions,
determines the relation label.
"""

from __future__ import annotations

import numpy as np

from .corpus import EntityMention, RelationExample

NEGATIVE = "no_relation"
TRIGGERS = {
    "inhibit": ("inhibits", "blocks", "suppresses", "reduces"),
    "induce": ("induces", "increases", "enhances", "potentiates"),
    NEGATIVE: ("resembles", "accompanies", "precedes", "follows"),
}
DRUGS = ("aspirin", "warfarin", "digoxin", "ketoconazole", "cyclosporine", "acetazolamide",
         "rifampin", "phenytoin", "lithium", "cimetidine", "fluoxetine", "verapamil")
ADVERBS = ("strongly", "rarely", "often", "markedly")
NOUNS = ("patients", "rats", "vitro", "volunteers")
TYPES = ("drug", "brand")


def _template(kind: int, e1: list[str], e2: str, trig: str, adv: str, noun: str):
    """Return tokens, POS, heads, deprels and the two spans for one template."""
    if kind == 0:
        # E1 ADV TRIG E2 in NOUN .
        toks = e1 + [adv, trig, e2, "in", noun, "."]
        k = len(e1)
        heads = [k] * (k - 1) + [k + 2, k + 2, 0, k + 2, k + 5, k + 2, k + 2]
        pos = ["NN"] * k + ["RB", "VBZ", "NN", "IN", "NNS", "."]
        rels = ["compound"] * (k - 1) + ["nsubj", "advmod", "root", "obj", "case", "obl", "punct"]
        return toks, pos, heads, rels, (1, k), (k + 3, k + 3)
    if kind == 1:
        # the E1 TRIG E2 levels in NOUN .
        toks = ["the"] + e1 + [trig, e2, "levels", "in", noun, "."]
        k = len(e1)
        heads = [k + 1] + [k + 1] * (k - 1) + [k + 2, 0, k + 4, k + 2, k + 6, k + 2, k + 2]
        pos = ["DT"] + ["NN"] * k + ["VBZ", "NN", "NNS", "IN", "NNS", "."]
        rels = ["det"] + ["compound"] * (k - 1) + ["nsubj", "root", "compound", "obj", "case", "obl", "punct"]
        return toks, pos, heads, rels, (2, k + 1), (k + 3, k + 3)
    # in NOUN , E1 TRIG the E2 ADV .
    toks = ["in", noun, ","] + e1 + [trig, "the", e2, adv, "."]
    k = len(e1)
    v = k + 4
    heads = [2, v, v] + [k + 3] * (k - 1) + [v, 0, v + 2, v, v, v]
    pos = ["IN", "NNS", ","] + ["NN"] * k + ["VBZ", "DT", "NN", "RB", "."]
    rels = ["case", "obl", "punct"] + ["compound"] * (k - 1) + ["nsubj", "root", "det", "obj", "advmod", "punct"]
    return toks, pos, heads, rels, (4, k + 3), (v + 2, v + 2)


def make_corpus(counts: dict[str, int], seed: int = 0, prefix: str = "syn") -> list[RelationExample]:
    """Generate ``counts[label]`` examples per label, shuffled deterministically."""
    rng = np.random.default_rng(seed)
    labels = [lab for lab, c in counts.items() for _ in range(c)]
    rng.shuffle(labels)
    out = []
    for i, label in enumerate(labels):
        pick = lambda seq: seq[int(rng.integers(len(seq)))]  # noqa: E731
        d1, d2 = rng.choice(len(DRUGS), size=2, replace=False)
        e1 = [DRUGS[d1]] if rng.random() < 0.75 else [DRUGS[d1], "sodium"]
        toks, pos, heads, rels, m1, m2 = _template(int(rng.integers(3)), e1, DRUGS[d2],
                                                   pick(TRIGGERS[label]), pick(ADVERBS), pick(NOUNS))
        ex = RelationExample(
            id=f"{prefix}{i:04d}", tokens=tuple(toks), pos_tags=tuple(pos), dep_heads=tuple(heads),
            dep_labels=tuple(rels), m1=EntityMention(m1[0], m1[1], pick(TYPES)),
            m2=EntityMention(m2[0], m2[1], pick(TYPES)), label=label)
        ex.validate()
        out.append(ex)
    return out


def overfit_corpus() -> list[RelationExample]:
    """The 50-example corpus: two relation types plus the negative class."""
    return make_corpus({"inhibit": 15, "induce": 15, NEGATIVE: 20}, seed=0)


def imbalanced_corpus(n: int = 200, negative_fraction: float = 0.85, seed: int = 1) -> list[RelationExample]:
    neg = int(round(n * negative_fraction))
    pos = n - neg
    return make_corpus({NEGATIVE: neg, "inhibit": pos // 2, "induce": pos - pos // 2}, seed=seed, prefix="imb")


def bundled_path(name: str):
    """Path of a file shipped in ``relpool/data`` (e.g. ``synthetic_train.jsonl``, ``overfit.yaml``)."""
    from importlib import resources
    return resources.files("relpool.data").joinpath(name)


def overfit_config():
    from .config import ExperimentConfig
    return ExperimentConfig.load(bundled_path("overfit.yaml"))

import numpy as np
import pytest

from relpool.corpus import EntityMention, RelationExample
from relpool.numeric import Tape


@pytest.fixture
def worked_example():
    # "Acetazolamide can elevate cyclosporine levels", heads [3,3,0,5,3]
    return RelationExample(
        id="ddi-1",
        tokens=("Acetazolamide", "can", "elevate", "cyclosporine", "levels"),
        pos_tags=("NN", "MD", "VB", "NN", "NNS"),
        dep_heads=(3, 3, 0, 5, 3),
        dep_labels=("nsubj", "aux", "root", "compound", "obj"),
        m1=EntityMention(1, 1, "drug"),
        m2=EntityMention(4, 4, "drug"),
        label="mechanism",
    )


def random_tree(rng, n):
    """Uniform-ish random rooted tree: each node after the first attaches to an earlier one, then relabel."""
    perm = rng.permutation(n) + 1
    head = [0] * n
    for k in range(1, n):
        parent = perm[rng.integers(k)]
        head[perm[k] - 1] = int(parent)
    return head


def random_spans(rng, n):
    cuts = np.sort(rng.choice(np.arange(1, n + 1), size=4, replace=True))
    s1, e1, s2, e2 = (int(c) for c in cuts)
    if e1 >= s2:
        return None
    return (s1, e1), (s2, e2)


def kink_margin(fn):
    """Distance of the graph built by ``fn`` from its nearest non-differentiable point.

    Looks at every ReLU input (distance from 0) and every masked max (gap
    between the winner and the runner-up inside each selected set).  Zeros
    produced by a ReLU are left out of the gap: their inputs are already
    bounded away from the kink, so they stay constant under perturbation.
    """
    with Tape() as tape:
        fn()
    margin = np.inf
    relu_outputs = set()
    for node in tape.nodes:
        if node.op == "relu":
            margin = min(margin, float(np.abs(node.inputs[0].data).min()))
            relu_outputs.add(id(node.output))
        elif node.op == "masked_max":
            x = node.inputs[0].data
            mask = node.saved["mask"]
            filled = np.where(mask[..., None], x, -np.inf)
            if id(node.inputs[0]) in relu_outputs:
                # dead units are locally constant zeros; ties among them are harmless
                filled = np.where(filled == 0, -np.inf, filled)
            top2 = -np.sort(-filled, axis=-2)[..., :2, :]
            with np.errstate(invalid="ignore"):  # sets with fewer than two members
                gap = top2[..., 0, :] - top2[..., 1, :]
            gap = gap[np.isfinite(gap)]
            if gap.size:
                margin = min(margin, float(gap.min()))
    return margin


def jitter(module, rng, scale=0.1):
    for p in module.parameters():
        p.data = p.data + rng.normal(0, scale, p.shape).astype(p.dtype)


def mutate_mentions(ex, rng):
    """Same example with fresh random surface strings inside both mention spans."""
    import dataclasses
    import string

    tokens = list(ex.tokens)
    for m in (ex.m1, ex.m2):
        for i in range(m.start - 1, m.end):
            k = int(rng.integers(3, 12))
            tokens[i] = "".join(rng.choice(list(string.ascii_letters + "-0123456789"), k))
    return dataclasses.replace(ex, tokens=tuple(tokens), id=ex.id + "-mut")


WORDS = ("aspirin", "blocks", "the", "uptake", "of", "warfarin", "in", "rats")
TAGS = ("NN", "VBZ", "DT", "IN")
LABELS = ("no_relation", "inhibit", "induce")


def tiny_examples(rng, count, max_n=5):
    """Random well-formed examples of at most ``max_n`` tokens."""
    out = []
    while len(out) < count:
        n = int(rng.integers(2, max_n + 1))
        spans = random_spans(rng, n)
        if spans is None:
            continue
        (s1, e1), (s2, e2) = spans
        head = random_tree(rng, n)
        out.append(RelationExample(
            id=f"tiny{len(out)}",
            tokens=tuple(str(rng.choice(WORDS)) for _ in range(n)),
            pos_tags=tuple(str(rng.choice(TAGS)) for _ in range(n)),
            dep_heads=tuple(head),
            dep_labels=tuple("dep" if h else "root" for h in head),
            m1=EntityMention(s1, e1, str(rng.choice(["drug", "brand"]))),
            m2=EntityMention(s2, e2, "drug"),
            label=LABELS[len(out) % len(LABELS)],
        ))
    return out


def tiny_config(encoder, pooling, **changes):
    from relpool.config import ExperimentConfig
    base = dict(encoder=encoder, pooling=pooling, word_dim=3, pos_dim=1, lstm_layers=2, lstm_hidden=2,
                cnn_windows=[2, 3], cnn_filters=2, gcn_layers=2, gcn_hidden=3, ff_hidden=4,
                precision="float64", seeds=[1], epochs=2, batch_size=4, embedding_init=1.0)
    base.update(changes)
    return ExperimentConfig(**base)


def composite_gradcheck(encoder, pooling, rtol=1e-3, tries=200):
    """Finite-difference check of the full classifier loss at a kink-free random point."""
    from relpool.corpus import Vocabulary
    from relpool.model import RelationClassifier
    from relpool.numeric import check_gradients

    for seed in range(tries):
        rng = np.random.default_rng(seed)
        examples = tiny_examples(rng, 3)
        config = tiny_config(encoder, pooling)
        vocab = Vocabulary.build(examples, config.negative_label)
        model = RelationClassifier(vocab, config, rng)
        jitter(model, rng)
        batch = model.batch([model.encode(ex) for ex in examples])

        def loss():
            return model.loss(batch)

        if kink_margin(loss) > 1e-3:
            break
    else:
        raise RuntimeError(f"no kink-free instance for {encoder}/{pooling}")
    check_gradients(loss, model.parameters(), rtol=rtol, atol=1e-6)


# -- acceptance reporting -----------------------------------------------------------

ACCEPTANCE = {}


class Criterion:
    def __init__(self, name):
        self.name = name
        ACCEPTANCE[name] = ("FAIL", "did not finish")

    def record(self, ok, detail):
        ACCEPTANCE[self.name] = ("PASS" if ok else "FAIL", detail)
        return ok


@pytest.fixture
def criterion(request):
    return Criterion(request.node.get_closest_marker("criterion").args[0])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{status} {name}: {detail}")

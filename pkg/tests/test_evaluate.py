import numpy as np
import pytest

from relpool.encoders import ENCODER_KINDS
from relpool.evaluate import emit_table, micro_f1
from relpool.pooling import STRATEGIES

from oracles import brute_micro_f1

NEG = "neg"


def test_worked_example():
    r = micro_f1(["A", "A", "B", NEG], ["A", "B", "B", "B"], NEG)
    assert (sum(r.tp.values()), sum(r.fp.values()), sum(r.fn.values())) == (2, 2, 1)
    assert r.precision == pytest.approx(0.5, abs=1e-9)
    assert r.recall == pytest.approx(2 / 3, abs=1e-9)
    assert r.f1 == pytest.approx(4 / 7, abs=1e-9)


def test_perfect_prediction():
    r = micro_f1(["A", "B", "A"], ["A", "B", "A"], NEG)
    assert r.precision == r.recall == r.f1 == 1.0


def test_all_negative_predictions():
    r = micro_f1(["A", "B", NEG], [NEG, NEG, NEG], NEG)
    assert r.recall == 0 and r.f1 == 0


def test_length_mismatch():
    with pytest.raises(ValueError, match="labels"):
        micro_f1(["A"], ["A", "B"], NEG)


def test_matches_brute_force_and_order_invariant():
    rng = np.random.default_rng(0)
    alphabet = [NEG, "A", "B", "C"]
    for _ in range(1000):
        n = int(rng.integers(1, 30))
        gold = list(rng.choice(alphabet, n))
        pred = list(rng.choice(alphabet, n))
        r = micro_f1(gold, pred, NEG)
        tp, fp, fn, p, rec, f = brute_micro_f1(gold, pred, NEG)
        assert (sum(r.tp.values()), sum(r.fp.values()), sum(r.fn.values())) == (tp, fp, fn)
        assert (r.precision, r.recall, r.f1) == (p, rec, f)
        perm = rng.permutation(n)
        assert micro_f1([gold[i] for i in perm], [pred[i] for i in perm], NEG).f1 == r.f1
        # confusion marginals are the label histograms
        for k, lab in enumerate(r.labels):
            assert r.confusion[k].sum() == gold.count(lab)
            assert r.confusion[:, k].sum() == pred.count(lab)


def test_single_class_is_binary_f1():
    rng = np.random.default_rng(1)
    gold = list(rng.choice([NEG, "A"], 50))
    pred = list(rng.choice([NEG, "A"], 50))
    tp = sum(g == p == "A" for g, p in zip(gold, pred))
    fp = sum(p == "A" != g for g, p in zip(gold, pred))
    fn = sum(g == "A" != p for g, p in zip(gold, pred))
    assert micro_f1(gold, pred, NEG).f1 == pytest.approx(2 * tp / (2 * tp + fp + fn))


def _record(enc, pool, f1=0.5):
    return {"encoder": enc, "pooling": pool,
            "summary": {"mean_precision": 0.6, "mean_recall": 0.4, "mean_f1": f1, "std_f1": 0.012}}


def test_table_one_row():
    lines = emit_table([_record("BiLSTM", "ENT-DEP1", 0.739)]).splitlines()
    assert len(lines) == 3
    assert lines[2].split() == ["BiLSTM", "ENT-DEP1", "60.0", "40.0", "73.9", "1.2"]


def test_table_blocks_and_determinism():
    rng = np.random.default_rng(0)
    records = [_record(e, p, float(rng.random())) for e in ENCODER_KINDS for p in STRATEGIES]
    shuffled = [records[i] for i in rng.permutation(len(records))]
    table = emit_table(shuffled)
    assert table == emit_table(records)
    body = table.splitlines()[2:]
    blocks = "\n".join(body).split("\n\n")
    assert len(blocks) == 4
    for enc, block in zip(ENCODER_KINDS, blocks):
        rows = block.splitlines()
        assert rows[0].startswith(enc)
        assert [r.split()[-5] for r in rows] == list(STRATEGIES)

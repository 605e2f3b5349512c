"""Micro-averaged scoring over positive relation classes and result tables."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoders import ENCODER_KINDS
from .pooling import STRATEGIES


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


@dataclass
class EvalReport:
    labels: list[str]  # negative label first, then positives sorted
    negative_label: str
    tp: dict[str, int]
    fp: dict[str, int]
    fn: dict[str, int]
    precision: float
    recall: float
    f1: float
    confusion: np.ndarray  # rows gold, columns predicted, in ``labels`` order

    def per_class(self) -> dict[str, tuple[float, float, float]]:
        return {lab: _prf(self.tp[lab], self.fp[lab], self.fn[lab]) for lab in self.labels[1:]}

    def to_dict(self) -> dict:
        return {
            "precision": self.precision, "recall": self.recall, "f1": self.f1,
            "per_class": {lab: dict(zip(("precision", "recall", "f1"), v)) for lab, v in self.per_class().items()},
            "counts": {lab: {"tp": self.tp[lab], "fp": self.fp[lab], "fn": self.fn[lab]} for lab in self.labels[1:]},
            "labels": self.labels,
            "confusion": self.confusion.tolist(),
        }


def micro_f1(gold: Sequence[str], pred: Sequence[str], negative_label: str) -> EvalReport:
    """Pool TP/FP/FN over every label except ``negative_label``.

    A positive prediction on a negative example counts as a false positive
    for the predicted class; a negative prediction on a positive example is a
    false negative for the gold class.
    """
    if len(gold) != len(pred):
        raise ValueError(f"gold has {len(gold)} labels but pred has {len(pred)}")
    if not gold:
        raise ValueError("cannot score an empty label sequence")
    positives = sorted((set(gold) | set(pred)) - {negative_label})
    labels = [negative_label] + positives
    idx = {lab: i for i, lab in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for g, p in zip(gold, pred):
        confusion[idx[g], idx[p]] += 1
    tp, fp, fn = Counter(), Counter(), Counter()
    for lab in positives:
        i = idx[lab]
        tp[lab] = int(confusion[i, i])
        fp[lab] = int(confusion[:, i].sum() - confusion[i, i])
        fn[lab] = int(confusion[i, :].sum() - confusion[i, i])
    p, r, f = _prf(sum(tp.values()), sum(fp.values()), sum(fn.values()))
    return EvalReport(labels, negative_label, {lab: tp[lab] for lab in positives},
                      {lab: fp[lab] for lab in positives}, {lab: fn[lab] for lab in positives},
                      p, r, f, confusion)


def emit_table(records: Sequence[dict]) -> str:
    """Format experiment summaries as encoder blocks of pooling rows.

    Each record needs ``encoder``, ``pooling`` and a ``summary`` with
    ``mean_precision``, ``mean_recall``, ``mean_f1`` and ``std_f1`` (as
    fractions).  Numbers print as percentages with one decimal.
    """
    if not records:
        raise ValueError("no results to tabulate")

    def order(rec):
        enc, pool = rec["encoder"], rec["pooling"]
        return (ENCODER_KINDS.index(enc) if enc in ENCODER_KINDS else len(ENCODER_KINDS), enc,
                STRATEGIES.index(pool) if pool in STRATEGIES else len(STRATEGIES), pool)

    def pct(x):
        return "   -" if x is None or not np.isfinite(x) else f"{100 * x:5.1f}"

    header = f"{'Model':<12} {'Pooling':<9} {'P':>5} {'R':>5} {'F1':>5} {'F1 sd':>5}"
    lines = [header, "-" * len(header)]
    previous = None
    for rec in sorted(records, key=order):
        s = rec["summary"]
        enc = rec["encoder"]
        if previous is not None and enc != previous:
            lines.append("")
        name = enc if enc != previous else ""
        previous = enc
        lines.append(f"{name:<12} {rec['pooling']:<9} {pct(s.get('mean_precision'))} "
                     f"{pct(s.get('mean_recall'))} {pct(s.get('mean_f1'))} {pct(s.get('std_f1'))}")
    return "\n".join(lines) + "\n"

"""Training loop, multi-seed experiments and model checkpoints."""

from __future__ import annotations

import json
import logging
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import islice
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ASSUMED_DEFAULTS, ExperimentConfig
from .corpus import RelationExample, Vocabulary, load_embeddings, parse_dataset, weighted_indices
from .evaluate import micro_f1
from .model import RelationClassifier
from .numeric import SGD, Tape, backward, load_checkpoint, no_grad, save_checkpoint

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainResult:
    model: RelationClassifier
    loss_trace: list[float]
    probe_trace: list[float]
    validation_f1: list[float]
    best_epoch: int


def _probe_loss(model, batch) -> float:
    with no_grad():
        return float(model.loss(batch).item())


def train(model: RelationClassifier, config: ExperimentConfig, train_set: Sequence[RelationExample],
          rng: np.random.Generator, validation: Sequence[RelationExample] | None = None) -> TrainResult:
    """Minimize the mean negative log-likelihood with SGD + Nesterov momentum.

    With a validation split the parameters of the epoch with the best
    validation micro-F1 are kept; otherwise the final parameters are.
    ``probe_trace[0]`` is the probe-batch loss before any update.
    """
    if not train_set:
        raise TrainingError("empty training set")
    encoded = [model.encode(ex) for ex in train_set]
    val_encoded = [model.encode(ex) for ex in validation] if validation else None
    probe = model.batch(encoded[:config.batch_size])
    optimizer = SGD(model.parameters(), lr=config.learning_rate, momentum=config.momentum,
                    nesterov=config.nesterov)
    stream = None
    if config.weighted_sampling:
        stream = weighted_indices([ex.label for ex in train_set], config.negative_label,
                                  seed=int(rng.integers(2**63 - 1)))
    n = len(encoded)
    steps = math.ceil(n / config.batch_size)
    loss_trace, probe_trace, val_trace = [], [_probe_loss(model, probe)], []
    best_f1, best_epoch, best_state = -1.0, config.epochs, None

    for epoch in range(1, config.epochs + 1):
        order = list(islice(stream, n)) if stream is not None else rng.permutation(n).tolist()
        total = 0.0
        for step in range(steps):
            chunk = [encoded[i] for i in order[step * config.batch_size:(step + 1) * config.batch_size]]
            with Tape():
                loss = model.loss(model.batch(chunk), training=True, rng=rng)
                value = loss.item()
                if not math.isfinite(value):
                    raise TrainingError(
                        f"loss became {value} at epoch {epoch}, step {step + 1}; "
                        f"try a smaller learning_rate (currently {config.learning_rate})")
                backward(loss)
            optimizer.step()
            total += value * len(chunk)
        loss_trace.append(total / n)
        probe_trace.append(_probe_loss(model, probe))
        if val_encoded:
            gold = [model.vocab.labels[e.label] for e in val_encoded]
            probs = model.predict_encoded(val_encoded, config.batch_size)
            pred = [model.vocab.labels[i] for i in probs.argmax(axis=1)]
            f1 = micro_f1(gold, pred, config.negative_label).f1
            val_trace.append(f1)
            if f1 > best_f1:
                best_f1, best_epoch, best_state = f1, epoch, model.state_dict()
        log.info("epoch %d loss %.4f probe %.4f%s", epoch, loss_trace[-1], probe_trace[-1],
                 f" val-F1 {val_trace[-1]:.4f}" if val_trace else "")
    if best_state is not None:
        model.load_state_dict(best_state)
    return TrainResult(model, loss_trace, probe_trace, val_trace, best_epoch)


# -- checkpoints -------------------------------------------------------------


def save_model(path, model: RelationClassifier) -> None:
    meta = {"config": model.config.to_dict(), "vocab": model.vocab.to_dict()}
    save_checkpoint(path, model.state_dict(), model.config.precision, meta)


def load_model(path) -> RelationClassifier:
    params, precision, meta = load_checkpoint(path)
    config = ExperimentConfig.from_dict(meta["config"])
    if config.precision != precision:
        raise ValueError(f"{path}: precision tag {precision} disagrees with config {config.precision}")
    vocab = Vocabulary.from_dict(meta["vocab"])
    model = RelationClassifier(vocab, config, np.random.default_rng(0))
    model.load_state_dict(params)
    return model


# -- experiments -------------------------------------------------------------


@dataclass
class Datasets:
    train: list[RelationExample]
    test: list[RelationExample]
    dev: list[RelationExample] | None = None
    pretrained: dict | None = None

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "Datasets":
        if not config.train_path or not config.test_path:
            raise ValueError("config needs train_path and test_path")
        pretrained = None
        if config.embeddings_path:
            pretrained = load_embeddings(config.embeddings_path, dim=config.word_dim)
        return cls(parse_dataset(config.train_path), parse_dataset(config.test_path),
                   parse_dataset(config.dev_path) if config.dev_path else None, pretrained)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: list[dict] = field(default_factory=list)
    status: str = "ok"

    def _values(self, key):
        return [r[key] for r in self.runs if r["status"] == "ok"]

    def summary(self) -> dict:
        out = {}
        for key in ("precision", "recall", "f1"):
            vals = self._values(key)
            out[f"mean_{key}"] = float(np.mean(vals)) if vals else float("nan")
            out[f"std_{key}"] = float(np.std(vals)) if vals else float("nan")
        return out

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "encoder": self.config.encoder,
            "pooling": self.config.pooling,
            "status": self.status,
            "runs": self.runs,
            "summary": self.summary(),
            "assumed_defaults": {k: _assumed_value(self.config, k) for k in ASSUMED_DEFAULTS},
            "environment": {"precision": self.config.precision, "python": platform.python_version(),
                            "numpy": np.__version__},
        }


def _assumed_value(config, key):
    fixed = {"nesterov_variant": "v <- mu*v - lr*g; p <- p + mu*v - lr*g",
             "classifier_activation": "relu", "gradient_clipping": "none"}
    return fixed.get(key, getattr(config, key, None))


def build_vocab(config: ExperimentConfig, data: Datasets) -> Vocabulary:
    extra = list(data.test) + list(data.dev or [])
    return Vocabulary.build(data.train, config.negative_label, extra=extra, pretrained=data.pretrained)


def run_seed(config: ExperimentConfig, seed: int, data: Datasets, vocab: Vocabulary,
             checkpoint_dir: Path | None = None) -> dict:
    """Train and evaluate one seed; everything random comes from ``default_rng(seed)``."""
    rng = np.random.default_rng(seed)
    train_set, validation = list(data.train), data.dev
    if validation is None and config.holdout_fraction > 0 and len(train_set) > 1:
        order = rng.permutation(len(train_set))
        k = max(1, int(round(config.holdout_fraction * len(train_set))))
        validation = [train_set[i] for i in sorted(order[:k])]
        train_set = [train_set[i] for i in sorted(order[k:])]
    model = RelationClassifier(vocab, config, rng, data.pretrained)
    result = train(model, config, train_set, rng, validation)
    gold = [ex.label for ex in data.test]
    report = micro_f1(gold, model.predict(data.test), config.negative_label)
    record = {"seed": seed, "status": "ok", "precision": report.precision, "recall": report.recall,
              "f1": report.f1, "best_epoch": result.best_epoch, "loss_trace": result.loss_trace,
              "probe_trace": result.probe_trace, "validation_f1": result.validation_f1}
    if checkpoint_dir is not None:
        checkpoint_dir.mkdir(parents=True, exist_ok=True)
        path = checkpoint_dir / f"seed{seed}.ckpt"
        save_model(path, model)
        record["checkpoint"] = str(path)
    return record


def _run_seed_safe(args) -> dict:
    config, seed, data, vocab, checkpoint_dir = args
    try:
        return run_seed(config, seed, data, vocab, checkpoint_dir)
    except Exception as exc:  # recorded, the other seeds keep going
        log.exception("seed %d failed", seed)
        return {"seed": seed, "status": "failed", "error": f"{type(exc).__name__}: {exc}"}


def run_experiment(config: ExperimentConfig, data: Datasets, output_dir=None) -> ExperimentResult:
    """One model per seed, each scored on the test split; writes ``results.json`` if ``output_dir``."""
    vocab = build_vocab(config, data)
    out = Path(output_dir) if output_dir is not None else None
    ckpt_dir = out / "checkpoints" if out is not None else None
    jobs = [(config, s, data, vocab, ckpt_dir) for s in config.seeds]
    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            runs = list(pool.map(_run_seed_safe, jobs))
    else:
        runs = [_run_seed_safe(j) for j in jobs]
    result = ExperimentResult(config, runs)
    if any(r["status"] != "ok" for r in runs):
        result.status = "failed"
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.json").write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n")
    return result


def run_matrix(config: ExperimentConfig, data: Datasets, output_dir=None,
               encoders: Sequence[str] | None = None, poolings: Sequence[str] | None = None) -> list[ExperimentResult]:
    from .encoders import ENCODER_KINDS
    from .pooling import STRATEGIES
    results = []
    for enc in encoders or ENCODER_KINDS:
        for pool in poolings or STRATEGIES:
            cell = config.replace(encoder=enc, pooling=pool, name=f"{config.name}/{enc}/{pool}")
            cell_dir = Path(output_dir) / f"{enc}_{pool}" if output_dir is not None else None
            results.append(run_experiment(cell, data, cell_dir))
    return results


def accuracy(model: RelationClassifier, examples: Sequence[RelationExample]) -> float:
    pred = model.predict(examples)
    return float(np.mean([p == ex.label for p, ex in zip(pred, examples)]))


__all__ = ["TrainingError", "TrainResult", "train", "save_model", "load_model", "Datasets",
           "ExperimentResult", "run_experiment", "run_seed", "run_matrix", "build_vocab",
           "accuracy"]

"""Command-line interface.

Exit codes: 0 success, 1 usage/config error, 2 data validation failure,
3 training failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .corpus import DatasetError, EmbeddingFormatError, mask_entities, parse_dataset
from .evaluate import emit_table, micro_f1
from .numeric import CheckpointError
from .pooling import STRATEGIES, needs_tree, plan
from .syntax import path_sets
from .train import Datasets, TrainingError, load_model, run_experiment, run_matrix

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRAIN = 0, 1, 2, 3

log = logging.getLogger("relpool")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config)
    overrides = {}
    if getattr(args, "seeds", None):
        overrides["seeds"] = args.seeds
    if getattr(args, "epochs", None):
        overrides["epochs"] = args.epochs
    if getattr(args, "output", None):
        overrides["output_dir"] = args.output
    return config.replace(**overrides) if overrides else config


def cmd_train(args) -> int:
    config = _load_config(args)
    data = Datasets.from_config(config)
    result = run_experiment(config, data, config.output_dir)
    summary = result.summary()
    for run in result.runs:
        if run["status"] == "ok":
            print(f"seed {run['seed']}: P={run['precision']:.4f} R={run['recall']:.4f} F1={run['f1']:.4f}")
        else:
            print(f"seed {run['seed']}: FAILED ({run['error']})")
    print(f"mean F1 {summary['mean_f1']:.4f} (sd {summary['std_f1']:.4f}); "
          f"results in {Path(config.output_dir) / 'results.json'}")
    return EXIT_OK if result.status == "ok" else EXIT_TRAIN


def cmd_run_matrix(args) -> int:
    config = _load_config(args)
    data = Datasets.from_config(config)
    results = run_matrix(config, data, config.output_dir)
    table = emit_table([r.to_dict() for r in results])
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "table.txt").write_text(table)
    print(table, end="")
    return EXIT_OK if all(r.status == "ok" for r in results) else EXIT_TRAIN


def cmd_evaluate(args) -> int:
    model = load_model(args.checkpoint)
    examples = parse_dataset(args.data)
    report = micro_f1([ex.label for ex in examples], model.predict(examples), model.vocab.negative_label)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(f"P={report.precision:.4f} R={report.recall:.4f} F1={report.f1:.4f}")
        for label, (p, r, f) in report.per_class().items():
            print(f"  {label:<20} P={p:.4f} R={r:.4f} F1={f:.4f}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.checkpoint)
    examples = parse_dataset(args.data)
    probs = model.predict_proba(examples)
    labels = model.vocab.labels
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        for ex, p in zip(examples, probs):
            record = {"id": ex.id, "label": labels[int(p.argmax())],
                      "probabilities": {lab: float(x) for lab, x in zip(labels, p)}}
            out.write(json.dumps(record) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_inspect_pooling(args) -> int:
    examples = parse_dataset(args.data)
    if args.ids:
        wanted = set(args.ids)
        examples = [ex for ex in examples if ex.id in wanted]
        missing = wanted - {ex.id for ex in examples}
        if missing:
            print(f"unknown example ids: {', '.join(sorted(missing))}", file=sys.stderr)
            return EXIT_USAGE
    for ex in examples:
        ps = path_sets(ex.tree, ex.m1.span, ex.m2.span)
        p = plan(args.strategy, ex.n, ex.m1.span, ex.m2.span, ps if needs_tree(args.strategy) else None)
        record = {"id": ex.id, "masked_tokens": mask_entities(ex), "sdp0": list(ps.sdp0),
                  "sdp1": list(ps.sdp1), "plan": p.to_dict()}
        print(json.dumps(record))
    return EXIT_OK


def cmd_validate_data(args) -> int:
    status = EXIT_OK
    for path in args.files:
        try:
            examples = parse_dataset(path)
        except DatasetError as exc:
            print(f"INVALID {exc}", file=sys.stderr)
            status = EXIT_DATA
            continue
        ids = [ex.id for ex in examples]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            print(f"INVALID {path}: duplicate ids {', '.join(dupes)}", file=sys.stderr)
            status = EXIT_DATA
            continue
        print(f"OK {path}: {len(examples)} examples")
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relpool", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train and test one encoder/pooling pair over all seeds")
    p.add_argument("config")
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--epochs", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run-matrix", help="all 4 encoders x 5 pooling strategies")
    p.add_argument("config")
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--epochs", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_run_matrix)

    p = sub.add_parser("evaluate", help="micro-F1 of a checkpoint on a dataset")
    p.add_argument("checkpoint")
    p.add_argument("data")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="per-example label and probabilities")
    p.add_argument("checkpoint")
    p.add_argument("data")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("inspect-pooling", help="show masked tokens, SDP0/SDP1 and pooling sets")
    p.add_argument("data")
    p.add_argument("--strategy", choices=STRATEGIES, default="ENT-DEP1")
    p.add_argument("--ids", nargs="+")
    p.set_defaults(func=cmd_inspect_pooling)

    p = sub.add_parser("validate-data", help="check dataset files against the schema and invariants")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_validate_data)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CheckpointError, EmbeddingFormatError, FileNotFoundError, ValueError) as exc:
        if isinstance(exc, DatasetError):
            print(f"data error: {exc}", file=sys.stderr)
            return EXIT_DATA
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as exc:
        print(f"data error: {exc.args[0]}", file=sys.stderr)
        return EXIT_DATA
    except TrainingError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_TRAIN


if __name__ == "__main__":
    sys.exit(main())

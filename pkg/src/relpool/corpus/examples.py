"""Relation examples and the line-delimited JSON dataset format."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from ..syntax import DependencyTree, TreeError, validate_tree

__all__ = [
    "DatasetError",
    "EntityMention",
    "RelationExample",
    "parse_dataset",
    "parse_record",
    "example_to_record",
    "write_dataset",
    "mask_entities",
    "mask_token",
]


class DatasetError(ValueError):
    """A dataset line or record violates the format or an example invariant."""


@dataclass(frozen=True)
class EntityMention:
    start: int
    end: int
    entity_type: str

    @property
    def span(self) -> tuple[int, int]:
        return self.start, self.end


@dataclass(frozen=True)
class RelationExample:
    id: str
    tokens: tuple[str, ...]
    pos_tags: tuple[str, ...]
    dep_heads: tuple[int, ...]
    dep_labels: tuple[str, ...]
    m1: EntityMention
    m2: EntityMention
    label: str

    @property
    def n(self) -> int:
        return len(self.tokens)

    @property
    def tree(self) -> DependencyTree:
        return DependencyTree(self.dep_heads, self.dep_labels)

    def validate(self) -> None:
        n = self.n
        if n == 0:
            raise DatasetError(f"record {self.id}: empty sentence")
        lengths = {"pos": len(self.pos_tags), "head": len(self.dep_heads), "deprel": len(self.dep_labels)}
        for field, length in lengths.items():
            if length != n:
                raise DatasetError(f"record {self.id}: parallel lists: {field} has {length} entries for {n} tokens")
        s1, e1, s2, e2 = self.m1.start, self.m1.end, self.m2.start, self.m2.end
        if not (1 <= s1 <= e1 < s2 <= e2 <= n):
            raise DatasetError(
                f"record {self.id}: mention ordering: need 1 <= s1 <= e1 < s2 <= e2 <= n, "
                f"got e1=[{s1},{e1}] e2=[{s2},{e2}] n={n}")
        try:
            validate_tree(self.tree)
        except TreeError as exc:
            raise DatasetError(f"record {self.id}: {exc}") from None


@lru_cache(maxsize=1)
def _validator():
    schema = json.loads(resources.files("relpool.data").joinpath("example.schema.json").read_text())
    return jsonschema.Draft202012Validator(schema)


def parse_record(obj: dict) -> RelationExample:
    errors = sorted(_validator().iter_errors(obj), key=lambda e: list(e.path))
    if errors:
        rid = obj.get("id", "?") if isinstance(obj, dict) else "?"
        err = errors[0]
        where = "/".join(str(p) for p in err.path) or "<root>"
        raise DatasetError(f"record {rid}: schema: {where}: {err.message}")
    ex = RelationExample(
        id=obj["id"],
        tokens=tuple(obj["tokens"]),
        pos_tags=tuple(obj["pos"]),
        dep_heads=tuple(obj["head"]),
        dep_labels=tuple(obj["deprel"]),
        m1=EntityMention(obj["e1"]["start"], obj["e1"]["end"], obj["e1"]["type"]),
        m2=EntityMention(obj["e2"]["start"], obj["e2"]["end"], obj["e2"]["type"]),
        label=obj["label"],
    )
    ex.validate()
    return ex


def parse_dataset(path) -> list[RelationExample]:
    """Read a UTF-8 file with one JSON record per line; blank lines are skipped."""
    path = Path(path)
    examples = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{lineno}: malformed line: {exc.msg}") from None
            try:
                examples.append(parse_record(obj))
            except DatasetError as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from None
    return examples


def example_to_record(ex: RelationExample) -> dict:
    return {
        "id": ex.id,
        "tokens": list(ex.tokens),
        "pos": list(ex.pos_tags),
        "head": list(ex.dep_heads),
        "deprel": list(ex.dep_labels),
        "e1": {"start": ex.m1.start, "end": ex.m1.end, "type": ex.m1.entity_type},
        "e2": {"start": ex.m2.start, "end": ex.m2.end, "type": ex.m2.entity_type},
        "label": ex.label,
    }


def write_dataset(path, examples) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(example_to_record(ex), ensure_ascii=False) + "\n")


def mask_token(role: int, entity_type: str) -> str:
    return f"M{role}-{entity_type}"


def mask_entities(ex: RelationExample) -> list[str]:
    """Replace every token of each mention span with its role-and-type token."""
    out = list(ex.tokens)
    for role, m in ((1, ex.m1), (2, ex.m2)):
        tok = mask_token(role, m.entity_type)
        for i in range(m.start - 1, m.end):
            out[i] = tok
    return out

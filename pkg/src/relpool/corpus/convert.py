"""Build dataset records from CoNLL-U parses.

Tokenization, POS tagging and dependency parsing happen upstream (for
example Stanford CoreNLP or Stanza writing CoNLL-U with UPOS/XPOS and basic
dependencies).  This module only joins one parsed sentence with its gold
mention spans and label into the JSON-lines record format.
"""

from __future__ import annotations

from .examples import EntityMention, RelationExample


def conllu_to_example(lines: list[str], example_id: str, e1: tuple[int, int, str],
                      e2: tuple[int, int, str], label: str, use_xpos: bool = True) -> RelationExample:
    """``lines`` are the token rows of one sentence; multiword and empty-node rows are skipped.

    ``e1``/``e2`` are ``(start, end, type)`` with 1-based inclusive token indices.
    """
    tokens, pos, heads, rels = [], [], [], []
    for line in lines:
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.rstrip("\n").split("\t")
        if len(cols) != 10:
            raise ValueError(f"expected 10 CoNLL-U columns, got {len(cols)}: {line!r}")
        if "-" in cols[0] or "." in cols[0]:
            continue
        tokens.append(cols[1])
        pos.append(cols[4] if use_xpos and cols[4] != "_" else cols[3])
        heads.append(int(cols[6]))
        rels.append(cols[7])
    ex = RelationExample(example_id, tuple(tokens), tuple(pos), tuple(heads), tuple(rels),
                         EntityMention(*e1), EntityMention(*e2), label)
    ex.validate()
    return ex

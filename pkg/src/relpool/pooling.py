"""Max-pooling strategies that turn abstract vectors A into the representation F.

Each strategy selects a few token-index sets; F is the concatenation, in
plan order, of the elementwise max of A over each set.  Indices are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numeric import Tensor
from .numeric import ops
from .syntax import PathSets

STRATEGIES = ("ENT-ONLY", "ENT-SENT", "ENT-DYM", "ENT-DEP0", "ENT-DEP1")

# number of pooled sets per strategy; F has n_sets * d_A dims
SET_COUNTS = {"ENT-ONLY": 2, "ENT-SENT": 3, "ENT-DYM": 5, "ENT-DEP0": 3, "ENT-DEP1": 3}


class PoolingError(ValueError):
    pass


@dataclass(frozen=True)
class PoolingPlan:
    strategy: str
    index_sets: tuple[tuple[str, tuple[int, ...]], ...]

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.index_sets]

    @property
    def sets(self) -> list[tuple[int, ...]]:
        return [s for _, s in self.index_sets]

    def to_dict(self) -> dict:
        return {"strategy": self.strategy,
                "index_sets": [{"name": name, "indices": list(s)} for name, s in self.index_sets]}


def needs_tree(strategy: str) -> bool:
    return strategy in ("ENT-DEP0", "ENT-DEP1")


def output_dim(strategy: str, d_a: int) -> int:
    return SET_COUNTS[strategy] * d_a


def plan(strategy: str, n: int, m1: tuple[int, int], m2: tuple[int, int],
         path_sets: PathSets | None = None) -> PoolingPlan:
    if strategy not in STRATEGIES:
        raise PoolingError(f"unknown pooling strategy {strategy!r}; expected one of {STRATEGIES}")
    (s1, e1), (s2, e2) = m1, m2
    if not 1 <= s1 <= e1 < s2 <= e2 <= n:
        raise PoolingError(f"invalid mention spans {m1}, {m2} for n={n}")
    ent = (("m1", tuple(range(s1, e1 + 1))), ("m2", tuple(range(s2, e2 + 1))))
    if strategy == "ENT-ONLY":
        sets = ent
    elif strategy == "ENT-SENT":
        sets = ent + (("sent", tuple(range(1, n + 1))),)
    elif strategy == "ENT-DYM":
        sets = (("left", tuple(range(1, s1))),
                ("middle", tuple(range(s1, e2 + 1))),
                ("right", tuple(range(e2 + 1, n + 1)))) + ent
    else:
        if path_sets is None:
            raise PoolingError(f"{strategy} needs the shortest-dependency-path sets")
        path = path_sets.sdp0 if strategy == "ENT-DEP0" else path_sets.sdp1
        if any(not 1 <= i <= n for i in path):
            raise PoolingError(f"path indices {path} fall outside 1..{n}")
        sets = (("dep0" if strategy == "ENT-DEP0" else "dep1", tuple(path)),) + ent
    return PoolingPlan(strategy, sets)


def plan_masks(plans: Sequence[PoolingPlan], T: int) -> np.ndarray:
    """Boolean (B, S, T) selection masks for a batch padded to length T."""
    S = len(plans[0].index_sets)
    masks = np.zeros((len(plans), S, T), dtype=bool)
    for b, p in enumerate(plans):
        if len(p.index_sets) != S:
            raise PoolingError("all plans in a batch must use the same strategy")
        for s, idx in enumerate(p.sets):
            masks[b, s, [i - 1 for i in idx]] = True
    return masks


def pool_batch(a: Tensor, masks: np.ndarray) -> Tensor:
    """a: (B, T, d); masks: (B, S, T) -> F: (B, S*d).  Empty sets give zeros."""
    return ops.concat([ops.masked_max(a, masks[:, s, :]) for s in range(masks.shape[1])], axis=-1)


def pool(a, p: PoolingPlan) -> Tensor:
    """Pool one sentence's abstract vectors ``a`` (n, d) according to ``p``."""
    a = a if isinstance(a, Tensor) else Tensor(a)
    n = a.shape[0]
    for _, idx in p.index_sets:
        if any(not 1 <= i <= n for i in idx):
            raise PoolingError(f"plan index outside 1..{n}")
    masks = plan_masks([p], n)[0]
    return ops.concat([ops.masked_max(a, masks[s]) for s in range(masks.shape[0])], axis=-1)

"""Dependency trees: validation, shortest dependency paths and GCN adjacency.

All token indices are 1-based, matching the dataset format; ``head[i-1]``
is the parent of token ``i`` and 0 marks the root.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "TreeError",
    "DependencyTree",
    "PathSets",
    "validate_tree",
    "anchor_token",
    "sdp0",
    "sdp1",
    "path_sets",
    "gcn_adjacency",
]


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class DependencyTree:
    head: tuple[int, ...]
    label: tuple[str, ...] | None = None

    @property
    def n(self) -> int:
        return len(self.head)

    @classmethod
    def from_heads(cls, head: Sequence[int], label: Sequence[str] | None = None) -> "DependencyTree":
        tree = cls(tuple(int(h) for h in head), tuple(label) if label is not None else None)
        validate_tree(tree)
        return tree

    def neighbors(self) -> list[set[int]]:
        """Undirected adjacency; index 0 unused."""
        adj: list[set[int]] = [set() for _ in range(self.n + 1)]
        for child, parent in enumerate(self.head, start=1):
            if parent:
                adj[child].add(parent)
                adj[parent].add(child)
        return adj


@dataclass(frozen=True)
class PathSets:
    sdp0: tuple[int, ...]
    sdp1: tuple[int, ...]


def validate_tree(tree: DependencyTree) -> None:
    n = tree.n
    if n == 0:
        raise TreeError("tree: empty sentence")
    if tree.label is not None and len(tree.label) != n:
        raise TreeError(f"tree: {len(tree.label)} labels for {n} tokens")
    for i, h in enumerate(tree.head, start=1):
        if not 0 <= h <= n:
            raise TreeError(f"tree: head of token {i} is {h}, outside 0..{n}")
        if h == i:
            raise TreeError(f"tree: token {i} is its own head (cycle)")
    roots = [i for i, h in enumerate(tree.head, start=1) if h == 0]
    if not roots:
        raise TreeError("tree: no root token, so the head pointers form a cycle")
    if len(roots) > 1:
        raise TreeError(f"tree: expected exactly one root, found {len(roots)} ({roots})")
    # every node must reach the root; mark as we go so the walk is O(n)
    state = [0] * (n + 1)  # 0 unseen, 1 on current walk, 2 reaches root
    state[roots[0]] = 2
    for start in range(1, n + 1):
        walk = []
        node = start
        while state[node] == 0:
            state[node] = 1
            walk.append(node)
            node = tree.head[node - 1]
        if state[node] == 1:
            raise TreeError(f"tree: cycle through token {node}")
        for w in walk:
            state[w] = 2


def anchor_token(tree: DependencyTree, start: int, end: int) -> int:
    """Syntactic head of the span ``[start, end]``.

    The token whose parent lies outside the span; the last one if several.
    """
    outside = [i for i in range(start, end + 1)
               if not start <= tree.head[i - 1] <= end]
    return outside[-1]


def _tree_path(tree: DependencyTree, u: int, v: int) -> list[int]:
    # climb from both ends to the lowest common ancestor
    depth = {}
    node, d = u, 0
    ancestors_u = []
    while node:
        ancestors_u.append(node)
        depth[node] = d
        node = tree.head[node - 1]
        d += 1
    node = v
    tail = []
    while node not in depth:
        tail.append(node)
        node = tree.head[node - 1]
    return ancestors_u[:depth[node] + 1] + tail[::-1]


def sdp0(tree: DependencyTree, m1: tuple[int, int], m2: tuple[int, int]) -> tuple[int, ...]:
    """Sorted token indices on the undirected tree path between the mention anchors."""
    u = anchor_token(tree, *m1)
    v = anchor_token(tree, *m2)
    return tuple(sorted(_tree_path(tree, u, v)))


def sdp1(tree: DependencyTree, path: Sequence[int]) -> tuple[int, ...]:
    """``path`` plus every token one tree edge away from it."""
    adj = tree.neighbors()
    out = set(path)
    for t in path:
        out |= adj[t]
    return tuple(sorted(out))


def path_sets(tree: DependencyTree, m1: tuple[int, int], m2: tuple[int, int]) -> PathSets:
    p0 = sdp0(tree, m1, m2)
    return PathSets(p0, sdp1(tree, p0))


def gcn_adjacency(tree: DependencyTree) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric 0/1 adjacency with self-loops, and its row degrees."""
    n = tree.n
    a = np.eye(n)
    for child, parent in enumerate(tree.head, start=1):
        if parent:
            a[child - 1, parent - 1] = a[parent - 1, child - 1] = 1.0
    return a, a.sum(axis=1)


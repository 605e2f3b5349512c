"""Naive reference implementations used to check the library."""

from collections import deque


def bfs_path(head, u, v):
    """Token set on the shortest undirected path u -> v, by breadth-first search."""
    n = len(head)
    adj = {i: [] for i in range(1, n + 1)}
    for child, parent in enumerate(head, start=1):
        if parent:
            adj[child].append(parent)
            adj[parent].append(child)
    prev = {u: None}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in prev:
                prev[y] = x
                queue.append(y)
    path, x = [], v
    while x is not None:
        path.append(x)
        x = prev[x]
    return set(path)


def naive_sets(strategy, n, m1, m2, sdp0, sdp1):
    (s1, e1), (s2, e2) = m1, m2
    span1 = list(range(s1, e1 + 1))
    span2 = list(range(s2, e2 + 1))
    if strategy == "ENT-ONLY":
        return [span1, span2]
    if strategy == "ENT-SENT":
        return [span1, span2, list(range(1, n + 1))]
    if strategy == "ENT-DYM":
        return [list(range(1, s1)), list(range(s1, e2 + 1)), list(range(e2 + 1, n + 1)), span1, span2]
    if strategy == "ENT-DEP0":
        return [list(sdp0), span1, span2]
    return [list(sdp1), span1, span2]


def naive_pool(a, sets):
    """Double loop elementwise max; an empty set gives zeros."""
    d = len(a[0])
    out = []
    for s in sets:
        for j in range(d):
            best = None
            for i in s:
                x = a[i - 1][j]
                if best is None or x > best:
                    best = x
            out.append(0.0 if best is None else best)
    return out


def brute_micro_f1(gold, pred, negative):
    tp = fp = fn = 0
    for g, p in zip(gold, pred):
        if p != negative:
            if p == g:
                tp += 1
            else:
                fp += 1
        if g != negative and p != g:
            fn += 1
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return tp, fp, fn, prec, rec, f1

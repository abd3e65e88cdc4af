"""Sequential reference answers: union-find components and BFS diameter.

Nothing here is shared with the MPC pipeline; it exists to check it.
"""

from __future__ import annotations

import numpy as np


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n + 1))
        self.size = [1] * (n + 1)

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def components(edges, n: int) -> list[int]:
    """Root of every vertex 1..n (index 0 unused)."""
    uf = UnionFind(n)
    for u, v in np.asarray(edges, dtype=np.int64).reshape(-1, 2).tolist():
        uf.union(u, v)
    return [uf.find(x) for x in range(n + 1)]


def canonical(labels) -> list[int]:
    """Relabel a partition by first occurrence so equal partitions compare equal."""
    seen: dict[int, int] = {}
    out = []
    for lab in labels:
        out.append(seen.setdefault(lab, len(seen)))
    return out


def same_partition(labels_a, labels_b) -> bool:
    return canonical(labels_a) == canonical(labels_b)


def count_components(edges, n: int) -> int:
    roots = components(edges, n)
    return len(set(roots[1:]))


def diameter(edges, n: int, chunk: int = 256) -> int:
    """Largest finite BFS eccentricity over all components (exact)."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import shortest_path

    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if n == 0 or e.shape[0] == 0:
        return 0
    a = coo_matrix((np.ones(e.shape[0]), (e[:, 0] - 1, e[:, 1] - 1)), shape=(n, n)).tocsr()
    best = 0
    for lo in range(0, n, chunk):
        idx = np.arange(lo, min(n, lo + chunk))
        dist = shortest_path(a, method="D", directed=False, unweighted=True, indices=idx)
        finite = dist[np.isfinite(dist)]
        if finite.size:
            best = max(best, int(finite.max()))
    return best


def is_matching(edges) -> bool:
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    ends = e.ravel().tolist()
    return len(ends) == len(set(ends))


def max_matching_size(edges) -> int:
    """Exact maximum matching by exhaustive branching (tiny graphs only)."""
    e = [tuple(x) for x in np.asarray(edges, dtype=np.int64).reshape(-1, 2).tolist()]

    def go(i: int, used: frozenset) -> int:
        if i == len(e):
            return 0
        u, v = e[i]
        skip = go(i + 1, used)
        if u in used or v in used:
            return skip
        return max(skip, 1 + go(i + 1, used | {u, v}))

    return go(0, frozenset())


def hits_all(sets, hitters) -> bool:
    h = set(int(x) for x in hitters)
    return all(any(int(x) in h for x in s) for s in sets)

"""Edge-list graphs: normalization, file format and deterministic generators.

Vertex IDs are 1-based.  A normalized edge array has shape (m, 2), every row
``u < v``, no duplicates, rows sorted.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class DistGraph:
    edges: np.ndarray
    n: int

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    @classmethod
    def from_edges(cls, edges, n: int | None = None) -> "DistGraph":
        e = normalize_edges(edges)
        top = int(e.max()) if e.size else 0
        n = top if n is None else n
        if top > n:
            raise ValueError(f"edge endpoint {top} exceeds vertex bound {n}")
        return cls(e, n)

    def degrees(self) -> np.ndarray:
        """Degree of every ID 0..n (index 0 unused)."""
        return np.bincount(self.edges.ravel(), minlength=self.n + 1)

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {}
        for u, v in self.edges.tolist():
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        return {k: sorted(vs) for k, vs in sorted(adj.items())}


def normalize_edges(edges) -> np.ndarray:
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if e.size and e.min() < 1:
        raise ValueError("vertex IDs are 1-based")
    e = np.sort(e, axis=1)
    e = e[e[:, 0] != e[:, 1]]
    if e.shape[0] == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return np.unique(e, axis=0)


# --- file format -------------------------------------------------------------

def parse_edge_list(text: str) -> tuple[np.ndarray, int]:
    """Parse ``u v`` lines.  ``# n N`` declares the vertex bound (so isolated
    vertices survive a round trip); other ``#`` lines are comments."""
    pairs = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "n":
                declared = int(parts[1])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two endpoints, got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer endpoint in {raw!r}") from None
        if u < 1 or v < 1:
            raise ValueError(f"line {lineno}: IDs are 1-based")
        pairs.append((u, v))
    edges = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    top = int(edges.max()) if edges.size else 0
    n = declared if declared is not None else top
    if top > n:
        raise ValueError(f"endpoint {top} exceeds declared vertex count {n}")
    return edges, n


def read_edge_list(path) -> tuple[np.ndarray, int]:
    return parse_edge_list(Path(path).read_text())


def format_edge_list(edges, n: int) -> str:
    buf = io.StringIO()
    buf.write(f"# n {n}\n")
    for u, v in np.asarray(edges, dtype=np.int64).reshape(-1, 2).tolist():
        buf.write(f"{u} {v}\n")
    return buf.getvalue()


def write_edge_list(path, edges, n: int) -> None:
    Path(path).write_text(format_edge_list(edges, n))


# --- generators ----------------------------------------------------------------

def _rng(seed: int) -> np.random.Generator:
    # Philox is counter-based: the stream is a pure function of the key.
    return np.random.Generator(np.random.Philox(key=seed))


def path_graph(n: int):
    v = np.arange(1, n, dtype=np.int64)
    return np.stack([v, v + 1], axis=1), n


def cycle_graph(n: int):
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    e, _ = path_graph(n)
    return np.vstack([e, [[1, n]]]), n


def star_graph(n: int):
    if n < 1:
        raise ValueError("a star needs at least 1 vertex")
    leaves = np.arange(2, n + 1, dtype=np.int64)
    return np.stack([np.ones_like(leaves), leaves], axis=1), n


def grid_graph(dims):
    dims = [int(d) for d in dims]
    if not dims or min(dims) < 1:
        raise ValueError("grid dimensions must be positive")
    n = int(np.prod(dims))
    idx = np.arange(n, dtype=np.int64)
    coords = np.stack(np.unravel_index(idx, dims), axis=1)
    out = []
    for axis, size in enumerate(dims):
        ok = coords[:, axis] + 1 < size
        step = int(np.prod(dims[axis + 1:])) if axis + 1 < len(dims) else 1
        out.append(np.stack([idx[ok] + 1, idx[ok] + step + 1], axis=1))
    return (np.vstack(out) if out else np.zeros((0, 2), np.int64)), n


def hypercube_graph(dim: int):
    return grid_graph([2] * dim)


def tree_graph(n: int, seed: int = 0):
    """Random recursive tree: vertex v > 1 hangs below a uniform earlier vertex."""
    if n < 1:
        raise ValueError("a tree needs at least 1 vertex")
    v = np.arange(2, n + 1, dtype=np.int64)
    u = _rng(seed).random(v.shape[0])
    parent = 1 + np.floor(u * (v - 1)).astype(np.int64)
    return np.stack([parent, v], axis=1), n


def gnm_graph(n: int, m: int, seed: int = 0):
    """m distinct uniformly random edges on n vertices."""
    if n < 2 and m > 0:
        raise ValueError("need n >= 2 for edges")
    if m > n * (n - 1) // 2:
        raise ValueError(f"m={m} exceeds the complete graph on {n} vertices")
    rng = _rng(seed)
    chosen: dict[tuple[int, int], None] = {}
    while len(chosen) < m:
        need = m - len(chosen)
        batch = rng.integers(1, n + 1, size=(2 * need + 16, 2))
        for u, v in batch.tolist():
            if u == v:
                continue
            key = (u, v) if u < v else (v, u)
            if key not in chosen:
                chosen[key] = None
                if len(chosen) == m:
                    break
    return np.asarray(list(chosen), dtype=np.int64).reshape(-1, 2), n


def two_cycles_graph(n: int):
    if n % 2 or n < 6:
        raise ValueError("two_cycles needs an even n >= 6")
    half = n // 2
    a, _ = cycle_graph(half)
    return np.vstack([a, a + half]), n


def union_graph(parts):
    """Disjoint union of (edges, n) pairs, IDs shifted part by part."""
    out, offset = [], 0
    for edges, n in parts:
        out.append(np.asarray(edges, dtype=np.int64).reshape(-1, 2) + offset)
        offset += n
    return (np.vstack(out) if out else np.zeros((0, 2), np.int64)), offset


def relabel(edges, n: int, seed: int):
    """Apply a seeded random permutation of the IDs."""
    perm = _rng(seed).permutation(n) + 1
    e = np.asarray(edges, dtype=np.int64)
    return perm[e - 1] if e.size else e.copy(), n


KINDS = ("path", "cycle", "star", "grid", "hypercube", "tree", "gnm", "two_cycles", "union")


def generate(kind: str, **params):
    """Build a generator spec.  Common extras: ``isolated`` appends that many
    edgeless vertices; ``shuffle`` relabels IDs with the given seed."""
    params = dict(params)
    isolated = int(params.pop("isolated", 0))
    shuffle = params.pop("shuffle", None)
    if kind == "path":
        edges, n = path_graph(int(params["n"]))
    elif kind == "cycle":
        edges, n = cycle_graph(int(params["n"]))
    elif kind == "star":
        edges, n = star_graph(int(params["n"]))
    elif kind == "grid":
        dims = params["dims"]
        if isinstance(dims, str):
            dims = [int(x) for x in dims.replace("x", ",").split(",") if x]
        edges, n = grid_graph(dims)
    elif kind == "hypercube":
        edges, n = hypercube_graph(int(params["dim"]))
    elif kind == "tree":
        edges, n = tree_graph(int(params["n"]), int(params.get("seed", 0)))
    elif kind == "gnm":
        edges, n = gnm_graph(int(params["n"]), int(params["m"]), int(params.get("seed", 0)))
    elif kind == "two_cycles":
        edges, n = two_cycles_graph(int(params["n"]))
    elif kind == "union":
        parts = params["parts"]
        if isinstance(parts, str):
            parts = [parse_spec(p.replace(":", " ").replace(";", " ")) for p in parts.split("+")]
        edges, n = union_graph([generate(k, **kw) for k, kw in parts])
    else:
        raise ValueError(f"unknown graph kind {kind!r}; choose from {', '.join(KINDS)}")
    if isolated < 0:
        raise ValueError("isolated must be non-negative")
    n += isolated
    if shuffle is not None:
        edges, n = relabel(edges, n, int(shuffle))
    return edges, n


def parse_spec(text: str) -> tuple[str, dict]:
    """``"gnm n=100 m=300 seed=7"`` -> ``("gnm", {"n": "100", ...})``."""
    parts = text.split()
    if not parts:
        raise ValueError("empty graph spec")
    kw = {}
    for item in parts[1:]:
        if "=" not in item:
            raise ValueError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        kw[k] = v
    return parts[0], kw


def corpus() -> list[str]:
    """The correctness corpus as generator specs: every family at a spread of
    sizes up to 2^14 vertices and 2^16 edges, gnm with isolated vertices."""
    sizes = [2, 3, 5, 8, 13, 17, 31, 64, 100, 257, 1000, 1 << 12, 1 << 14]
    specs = []
    for n in sizes:
        specs += [f"path n={n}", f"star n={n}"]
        if n >= 3:
            specs.append(f"cycle n={n}")
        for s in range(3):
            specs.append(f"tree n={n} seed={s}")
    for n in (6, 8, 10, 20, 64, 130, 512, 2048, 1 << 14):
        specs.append(f"two_cycles n={n}")
    for dims in ("1x1", "2x1", "3x3", "4x7", "10x10", "16x16", "5x40", "64x64", "128x128", "4x4x4"):
        specs.append(f"grid dims={dims}")
    for d in (1, 2, 3, 5, 8, 11):
        specs.append(f"hypercube dim={d}")
    for n in (10, 50, 200, 1000, 4000, 1 << 14):
        for ratio in (0.5, 1, 2, 4):
            m = min(int(ratio * n), n * (n - 1) // 2)
            for s in range(3):
                iso = s * n // 10
                specs.append(f"gnm n={n - iso} m={min(m, (n - iso) * (n - iso - 1) // 2)} "
                             f"seed={s} isolated={iso}")
    specs.append(f"gnm n={(1 << 14) - 64} m={1 << 16} seed=7 isolated=64")
    specs += ["gnm n=40 m=780 seed=0", "gnm n=120 m=3000 seed=1 isolated=5"]
    # shuffled IDs, so smallest-ID structure is not aligned with the geometry
    for n in (64, 1000, 1 << 12):
        for s in range(3):
            specs += [f"path n={n} shuffle={s}", f"cycle n={n} shuffle={s}",
                      f"two_cycles n={n} shuffle={s}", f"grid dims=8x{n // 8} shuffle={s}"]
    for s in range(4):
        specs.append(f"union parts=cycle:n={50 + s}+star:n={20 + s}+path:n={9 + s}"
                     f"+tree:n={100 * (s + 1)}:seed={s} isolated={s} shuffle={s}")
    return specs

"""One-round deterministic coloring from low-degree polynomials over F_p.

Vertex ``i`` owns the polynomial f_i whose coefficients are the base-p digits
of ``i - 1`` and the curve {(x, f_i(x))}.  Two distinct polynomials of degree
at most d agree on at most d points, so with Delta * d < p some x puts vertex
i off every neighbor's curve; the color is that point flattened to
``x * p + f_i(x)``, so at most p^2 colors are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import CapacityError
from .finite_field import PrimeField, find_prime_in, int_log_ceil, next_prime, poly_eval_fp


@dataclass(frozen=True)
class ColoringParams:
    n_ids: int
    max_degree: int
    delta: int   # max(max_degree, 2)
    d: int
    field: PrimeField

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def num_colors(self) -> int:
        return self.field.p ** 2

    def interval(self) -> tuple[int, int]:
        return prime_interval(self.n_ids, self.delta)


def prime_interval(n_ids: int, delta: int) -> tuple[int, int]:
    """The window [10 D log_D n, 20 D log_D n] on clamped D and n."""
    dc = max(delta, 2)
    nc = max(n_ids, 4)
    lg = math.log(nc) / math.log(dc)
    lo = math.ceil(10 * dc * lg - 1e-9)
    hi = math.floor(20 * dc * lg + 1e-9)
    return max(lo, 2), hi


def make_params(n_ids: int, max_degree: int) -> ColoringParams:
    dc = max(max_degree, 2)
    nc = max(n_ids, 4)
    d = int_log_ceil(nc, dc)
    lo, hi = prime_interval(n_ids, max_degree)
    p = find_prime_in(lo, hi) if lo <= hi else None
    if p is None:
        p = next_prime(lo)
    assert dc * d < p, (dc, d, p)
    assert p ** (d + 1) >= n_ids
    return ColoringParams(n_ids=n_ids, max_degree=max_degree, delta=dc, d=d, field=PrimeField(p))


def id_coefficients(vid: int, params: ColoringParams) -> list[int]:
    """Little-endian base-p digits of ``vid - 1``, padded to d + 1."""
    p = params.p
    q = vid - 1
    digits = []
    for _ in range(params.d + 1):
        digits.append(q % p)
        q //= p
    assert q == 0, "ID outside the polynomial space"
    return digits


def vertex_color(vid: int, neighbor_ids: Iterable[int], params: ColoringParams) -> int:
    """Color of one vertex computed from its own ID and its neighbors' IDs only."""
    f = params.field
    mine = id_coefficients(vid, params)
    theirs = [id_coefficients(j, params) for j in neighbor_ids]
    for x in range(f.p):
        y = poly_eval_fp(mine, x, f)
        if all(poly_eval_fp(c, x, f) != y for c in theirs):
            return x * f.p + y
    raise AssertionError("no free point on the curve; Delta * d < p violated")


def _digit_matrix(ids: np.ndarray, p: int) -> np.ndarray:
    q = ids.astype(np.int64) - 1
    rows = []
    while True:
        rows.append(q % p)
        q = q // p
        if not q.any():
            break
    return np.stack(rows)  # (num_digits, len(ids)), little-endian


def _horner(digits: np.ndarray, x: int, p: int) -> np.ndarray:
    acc = np.zeros(digits.shape[1], dtype=np.int64)
    for row in digits[::-1]:
        acc = (acc * x + row) % p
    return acc


def kuhn_colors(ids, arc_src, arc_dst, params: ColoringParams) -> tuple[np.ndarray, int]:
    """Vectorised coloring of ``ids``.

    ``arc_src`` indexes into ``ids``; ``arc_dst`` holds the neighbor's ID.  Every
    vertex avoids the curves of the IDs on its own arcs.  Returns the color
    array aligned with ``ids`` and the number of polynomial evaluations done.
    """
    ids = np.asarray(ids, dtype=np.int64)
    arc_src = np.asarray(arc_src, dtype=np.int64)
    arc_dst = np.asarray(arc_dst, dtype=np.int64)
    p = params.p
    colors = np.full(ids.shape[0], -1, dtype=np.int64)
    if ids.size == 0:
        return colors, 0
    if ids.min() < 1 or ids.max() > params.n_ids:
        raise ValueError("vertex ID outside [1, n_ids]")
    if arc_dst.size and (arc_dst.min() < 1 or arc_dst.max() > params.n_ids):
        raise ValueError("neighbor ID outside [1, n_ids]")
    if np.any(ids[arc_src] == arc_dst):
        raise ValueError("self-loop in coloring input")

    width = max(1, params.d + 1)
    own = _digit_matrix(ids, p)
    # neighbor curves are evaluated once per distinct neighbor ID
    uniq_dst, dst_inv = np.unique(arc_dst, return_inverse=True)
    nbr = _digit_matrix(uniq_dst, p) if uniq_dst.size else np.zeros((1, 0), dtype=np.int64)
    assert own.shape[0] <= width and nbr.shape[0] <= width

    undecided = np.arange(ids.shape[0])
    arcs = np.arange(arc_src.shape[0])
    pos = np.full(ids.shape[0], -1, dtype=np.int64)
    evaluations = 0
    for x in range(p):
        fv = _horner(own[:, undecided], x, p)
        pos[undecided] = np.arange(undecided.shape[0])
        fa = _horner(nbr, x, p)[dst_inv[arcs]]
        evaluations += undecided.shape[0] + arcs.shape[0]
        clash = fv[pos[arc_src[arcs]]] == fa
        blocked = np.zeros(ids.shape[0], dtype=bool)
        blocked[arc_src[arcs[clash]]] = True
        ok = ~blocked[undecided]
        colors[undecided[ok]] = x * p + fv[ok]
        undecided = undecided[~ok]
        if undecided.size == 0:
            break
        keep = colors[arc_src[arcs]] < 0
        arcs = arcs[keep]
    assert undecided.size == 0, "no free point on the curve; Delta * d < p violated"
    return colors, evaluations


def kuhn_colors_dense(ids, adjacency: np.ndarray, params: ColoringParams) -> tuple[np.ndarray, int]:
    """``kuhn_colors`` for a graph given as a boolean adjacency matrix over
    ``ids`` (same rule, same output); suited to near-complete graphs."""
    ids = np.asarray(ids, dtype=np.int64)
    adj = np.asarray(adjacency, dtype=bool)
    p = params.p
    colors = np.full(ids.shape[0], -1, dtype=np.int64)
    if ids.size == 0:
        return colors, 0
    if ids.min() < 1 or ids.max() > params.n_ids:
        raise ValueError("vertex ID outside [1, n_ids]")
    if adj.shape != (ids.shape[0], ids.shape[0]) or adj.diagonal().any():
        raise ValueError("adjacency must be square over ids with an empty diagonal")
    digits = _digit_matrix(ids, p)
    degree = adj.sum(axis=1)
    undecided = np.arange(ids.shape[0])
    evaluations = 0
    for x in range(p):
        f_all = _horner(digits, x, p)
        fv = f_all[undecided]
        evaluations += undecided.shape[0] + int(degree[undecided].sum())
        clash = (adj[undecided] & (f_all[None, :] == fv[:, None])).any(axis=1)
        colors[undecided[~clash]] = x * p + fv[~clash]
        undecided = undecided[clash]
        if undecided.size == 0:
            break
    assert undecided.size == 0, "no free point on the curve; Delta * d < p violated"
    return colors, evaluations


@dataclass
class Coloring:
    colors: dict[int, int]
    params: ColoringParams
    evaluations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def num_colors(self) -> int:
        return self.params.num_colors


def max_degree(adjacency: Mapping[int, Iterable[int]]) -> int:
    return max((len(list(nb)) for nb in adjacency.values()), default=0)


def color_graph(adjacency: Mapping[int, Iterable[int]], n_ids: int,
                capacity: int | None = None) -> Coloring:
    """Color every vertex of ``adjacency`` (vertex ID -> neighbor IDs).

    ``capacity`` is the local word budget; a neighbor list longer than it
    cannot be gathered on one machine and is rejected.
    """
    verts = sorted(adjacency)
    lists = [list(adjacency[v]) for v in verts]
    delta = max((len(nb) for nb in lists), default=0)
    if capacity is not None and delta > capacity:
        raise CapacityError(f"max degree {delta} exceeds local capacity {capacity}",
                            words=delta, capacity=capacity)
    params = make_params(n_ids, delta)
    src = np.repeat(np.arange(len(verts)), [len(nb) for nb in lists]).astype(np.int64)
    dst = np.fromiter((j for nb in lists for j in nb), dtype=np.int64, count=int(src.shape[0]))
    colors, evals = kuhn_colors(np.asarray(verts, dtype=np.int64), src, dst, params)
    return Coloring(colors=dict(zip(verts, colors.tolist())), params=params, evaluations=evals)


def dense_rank(colors, sim=None) -> tuple[np.ndarray, int]:
    """Rename colors to 0..C'-1 preserving order.  Injective, so properness
    survives; the hash domain shrinks from p^2 to the colors actually used."""
    colors = np.asarray(colors, dtype=np.int64)
    if sim is None:
        uniq, inv = np.unique(colors, return_inverse=True)
        return inv.reshape(colors.shape).astype(np.int64), int(uniq.shape[0])
    uniq = sim.dedup(colors)
    ranks = sim.lookup(uniq, np.arange(uniq.shape[0], dtype=np.int64), colors, table_sorted=True)
    return ranks, int(uniq.shape[0])

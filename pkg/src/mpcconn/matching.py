"""Deterministic m/8 matching on graphs of maximum degree 2.

Edges get a proper line-graph coloring, then a pairwise independent family
h: [C] -> {0,1}^2 is searched.  Under h an edge is marked when h(c(e)) == 0,
and it joins M(h) when no adjacent edge is marked.  A marked edge has
probability 1/4 and each of its at most two neighbors collides with it with
probability 1/16, so the family average of |M(h)| is at least m/8 and the
scan always finds a seed reaching ceil(m/8).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coloring import ColoringParams, dense_rank, kuhn_colors, make_params
from .errors import DegreeTooHigh, InvariantError
from .graph import normalize_edges
from .hash_family import HashFamilySpec, HashSeed, iter_tables, make_family, seed_at
from .mpc import MpcConfig, Simulator

ELL = 2
K = 2
SEED_BATCH = 256


@dataclass
class EdgeColoring:
    colors: np.ndarray          # aligned with the normalized edge rows
    params: ColoringParams | None
    line_pairs: np.ndarray      # (q, 2) indices of adjacent edges


@dataclass
class MatchingResult:
    edges: np.ndarray
    seed: HashSeed | None
    family_size: int
    seeds_scanned: int
    target: int
    sizes_by_seed: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(self.edges.shape[0])

    def family_mean(self) -> float | None:
        if self.sizes_by_seed is None:
            return None
        return float(self.sizes_by_seed.mean())


def _incidence(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compact vertex index and (vertices, 2) incident-edge table padded with -1."""
    verts, inv = np.unique(edges.ravel(), return_inverse=True)
    inv = inv.reshape(edges.shape)
    deg = np.bincount(inv.ravel(), minlength=verts.shape[0])
    if deg.size and deg.max() > 2:
        raise DegreeTooHigh(f"maximum degree {int(deg.max())} exceeds 2")
    ends = inv.ravel()
    eid = np.repeat(np.arange(edges.shape[0]), 2)
    order = np.argsort(ends, kind="stable")
    ends, eid = ends[order], eid[order]
    slot = np.zeros_like(ends)
    if ends.size:
        slot[1:] = (ends[1:] == ends[:-1]).astype(np.int64)
    inc = np.full((verts.shape[0], 2), -1, dtype=np.int64)
    inc[ends, slot] = eid
    return verts, inv, inc


def color_edges(edges, sim: Simulator | None = None) -> EdgeColoring:
    """Proper coloring of the line graph (edges sharing an endpoint differ)."""
    edges = normalize_edges(edges)
    m = edges.shape[0]
    if m == 0:
        return EdgeColoring(np.zeros(0, np.int64), None, np.zeros((0, 2), np.int64))
    _, _, inc = _incidence(edges)
    if sim is not None:
        # group incidences by endpoint to find the line-graph edges
        sim.sort(np.stack([edges.ravel(), np.repeat(np.arange(m), 2)], axis=1), keys=[0])
    both = inc[(inc >= 0).all(axis=1)]
    pairs = np.sort(both, axis=1)
    line_deg = np.bincount(pairs.ravel(), minlength=m)
    params = make_params(m, int(line_deg.max()) if line_deg.size else 0)
    src = np.concatenate([pairs[:, 0], pairs[:, 1]])
    dst = np.concatenate([pairs[:, 1], pairs[:, 0]]) + 1
    colors, evals = kuhn_colors(np.arange(1, m + 1), src, dst, params)
    if sim is not None:
        sim.charge(0, evals)
    return EdgeColoring(colors, params, pairs)


def matching_sizes(spec: HashFamilySpec, table: np.ndarray, ranks: np.ndarray,
                   edges_idx: np.ndarray, inc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For a block of seeds: membership mask (seeds, m) and sizes (seeds,)."""
    marked = table[:, ranks] == 0
    pad = np.concatenate([marked, np.zeros((marked.shape[0], 1), bool)], axis=1)
    cnt = pad[:, inc[:, 0]].astype(np.int8) + pad[:, inc[:, 1]].astype(np.int8)
    inm = marked & (cnt[:, edges_idx[:, 0]] == 1) & (cnt[:, edges_idx[:, 1]] == 1)
    return inm, inm.sum(axis=1)


def derand_matching(edges, sim: Simulator | None = None, full_scan: bool = False,
                    batch: int = SEED_BATCH) -> MatchingResult:
    """Matching of size >= ceil(m/8) for a graph with maximum degree 2.

    The winning seed is the first in enumeration order meeting the target.
    ``full_scan`` evaluates every seed and keeps the per-seed sizes.
    """
    edges = normalize_edges(edges)
    m = edges.shape[0]
    if sim is None:
        n = int(edges.max()) if m else 1
        sim = Simulator(MpcConfig(input_words=max(1, n + m)))
    if m == 0:
        return MatchingResult(edges, None, 0, 0, 0,
                              np.zeros(0, np.int64) if full_scan else None)
    target = math.ceil(m / 8)
    _, inv, inc = _incidence(edges)
    with sim.phase("matching"):
        ec = color_edges(edges, sim)
        ranks, ncol = dense_rank(ec.colors, sim)
        spec = make_family(ncol, ELL, K)

        winner, winner_mask = None, None
        sizes = []
        scanned = 0
        for idx, table in iter_tables(spec, np.arange(ncol), batch=batch):
            inm, sz = matching_sizes(spec, table, ranks, inv, inc)
            scanned += idx.shape[0]
            if full_scan:
                sizes.append(sz)
            if winner is None:
                hit = np.flatnonzero(sz >= target)
                if hit.size:
                    winner = int(idx[hit[0]])
                    winner_mask = inm[hit[0]]
                    if not full_scan:
                        scanned = int(hit[0]) + 1 + int(idx[0])
                        break
        sim.charge(0, scanned * (m + ncol))
        sim.aggregate_seeds(scanned)
        if winner is None:
            raise InvariantError("no seed reaches ceil(m/8); family is not pairwise independent")
        chosen = sim.filter(edges, winner_mask)
    result = MatchingResult(
        edges=chosen, seed=seed_at(spec, winner), family_size=spec.size,
        seeds_scanned=scanned, target=target,
        sizes_by_seed=np.concatenate(sizes) if full_scan else None,
        extra={"colors_used": ncol, "p": ec.params.p if ec.params else None,
               "seed_bits": spec.seed_bits},
    )
    if result.size < target:
        raise InvariantError("selected matching below target")
    return result

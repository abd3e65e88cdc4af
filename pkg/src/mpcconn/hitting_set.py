"""Deterministic hitting set for leader election.

Input: n sets of size b over elements 1..n, set i containing i.  Output: a
set L meeting every S_i.

1. Elements lying in at least b^2 sets are heavy and go into L directly;
   sets containing one are done.  There are at most n/b heavy elements.
2. Surviving elements are joined when they share a set (conflict graph,
   maximum degree below b^3) and properly colored, so inside any set the
   colors are distinct.
3. A pairwise independent h: [C] -> {0,1}^l samples every element whose
   color hashes to 0 (probability p = 2^-l).  A set left unhit contributes
   its own index i.  Over the family, E|L_h| <= |heavy| + n_e p + n_s/(b p)
   by Chebyshev with pairwise independence, so a seed within twice that
   exists and the seed scan finds one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coloring import dense_rank, kuhn_colors, kuhn_colors_dense, make_params
from .errors import CapacityError, InvariantError
from .hash_family import HashSeed, eval_table, iter_tables, scatter, scattered_family, seed_at
from .mpc import MpcConfig, Simulator

K = 2
# seeds always examined before the scan may stop
MIN_WINDOW = 32
# explicit pair lists up to this many conflict pairs, dense products beyond
EXPLICIT_PAIR_LIMIT = 4_000_000
DENSE_MAX_ELEMENTS = 8192
TABLE_CELLS = 1 << 22


@dataclass
class HittingSetInstance:
    n: int
    b: int
    sets: np.ndarray  # (n, b), row i-1 is S_i, sorted

    def __post_init__(self):
        self.sets = np.asarray(self.sets, dtype=np.int64).reshape(self.n, self.b)
        self.validate()

    def validate(self) -> None:
        if self.n < 0 or self.b < 1:
            raise ValueError("need n >= 0 and b >= 1")
        if self.n == 0:
            return
        s = self.sets
        if s.min() < 1 or s.max() > self.n:
            raise ValueError("element outside [1, n]")
        srt = np.sort(s, axis=1)
        if self.b > 1 and np.any(srt[:, 1:] == srt[:, :-1]):
            raise ValueError("repeated element inside a set")
        own = np.arange(1, self.n + 1)
        if not np.all((s == own[:, None]).any(axis=1)):
            raise ValueError("set i must contain i")
        self.sets = srt


@dataclass
class ConflictGraph:
    """Either arc lists (``arc_src`` indexes ``elements``, ``arc_dst`` holds
    neighbor IDs) or, for dense instances, a boolean ``matrix`` over
    ``elements``."""

    elements: np.ndarray
    arc_src: np.ndarray | None
    arc_dst: np.ndarray | None
    max_degree: int
    pairs: int
    matrix: np.ndarray | None = None

    def edges(self) -> np.ndarray:
        if self.matrix is not None:
            i, j = np.nonzero(np.triu(self.matrix, 1))
            return np.stack([self.elements[i], self.elements[j]], axis=1)
        u = self.elements[self.arc_src]
        keep = u < self.arc_dst
        return np.stack([u[keep], self.arc_dst[keep]], axis=1)

    def is_proper(self, colors: np.ndarray) -> bool:
        """Edge scan: no conflict edge joins two equal colors."""
        colors = np.asarray(colors)
        if self.matrix is not None:
            for lo in range(0, colors.shape[0], 1024):
                block = self.matrix[lo:lo + 1024] & (colors[lo:lo + 1024, None] == colors[None, :])
                if block.any():
                    return False
            return True
        pos = np.searchsorted(self.elements, self.arc_dst)
        return not np.any(colors[self.arc_src] == colors[pos])

    def color(self, n_ids: int):
        """Proper coloring sized by the actual maximum degree."""
        params = make_params(n_ids, self.max_degree)
        if self.matrix is not None:
            colors, evals = kuhn_colors_dense(self.elements, self.matrix, params)
        else:
            colors, evals = kuhn_colors(self.elements, self.arc_src, self.arc_dst, params)
        return colors, evals, params


@dataclass
class HittingSetResult:
    hitters: np.ndarray
    seed: HashSeed | None
    fallback: bool
    heavy: np.ndarray
    altered: np.ndarray
    sampled: np.ndarray
    p_effective: float
    ell: int
    bound: float
    tau: float
    seeds_scanned: int = 0
    family_size: int = 0
    sizes_by_seed: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(self.hitters.shape[0])


def output_bits(b: int) -> int:
    """l = max(1, floor(log2(b) / 5)), so 2^l is about b^(1/5)."""
    return max(1, (max(b, 1).bit_length() - 1) // 5)


def standalone_config(n: int, b: int, delta: float = 0.5, kappa_global: float = 8.0) -> MpcConfig:
    """Simulator sizing for a lone instance: the n * poly(b) conflict workspace
    dominates, and a machine must be able to hold one conflict neighborhood."""
    return MpcConfig(delta=delta, input_words=max(1, n * b ** 3), kappa_global=kappa_global)


def preprocess_heavy(inst: HittingSetInstance, sim: Simulator) -> tuple[np.ndarray, np.ndarray]:
    """Heavy elements (in >= b^2 sets) and the row indices of sets avoiding them."""
    return _heavy(inst.sets, inst.b, sim)


def _heavy(sets: np.ndarray, b: int, sim: Simulator) -> tuple[np.ndarray, np.ndarray]:
    n_sets = sets.shape[0]
    if n_sets == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    flat = sets.ravel()
    uniq, counts = sim.colored_sum(flat, np.ones_like(flat))
    is_heavy = counts >= b * b
    heavy = uniq[is_heavy]
    if heavy.shape[0] * b > n_sets:
        raise InvariantError(f"{heavy.shape[0]} heavy elements exceed n/b")
    flag = sim.lookup(uniq, is_heavy.astype(np.int64), flat, default=0, table_sorted=True)
    row = np.repeat(np.arange(n_sets, dtype=np.int64), b)
    rows, hit = sim.colored_sum(row, flag)
    return heavy, rows[hit == 0]


def _check_degree(maxdeg: int, b: int) -> None:
    if maxdeg >= max(b, 2) ** 3:
        raise InvariantError(f"conflict degree {maxdeg} reaches b^3")


def build_conflict_graph(sets: np.ndarray, sim: Simulator) -> ConflictGraph:
    """Elements adjacent when some set holds both.  Each set contributes its
    b choose 2 pairs; small instances list them, large ones use an incidence
    product.  The charged cost is the pair list either way."""
    sets = np.asarray(sets, dtype=np.int64)
    n_sets = sets.shape[0]
    b = sets.shape[1] if sets.ndim == 2 else 0
    elements, pos = np.unique(sets, return_inverse=True)
    pos = pos.reshape(sets.shape)
    n_pairs = n_sets * (b * (b - 1) // 2)
    if n_pairs <= EXPLICIT_PAIR_LIMIT or elements.shape[0] > DENSE_MAX_ELEMENTS:
        iu, ju = np.triu_indices(b, 1)
        pairs = np.stack([pos[:, iu].ravel(), pos[:, ju].ravel()], axis=1)
        pairs = sim.dedup(pairs) if pairs.size else np.zeros((0, 2), np.int64)
        src = np.concatenate([pairs[:, 0], pairs[:, 1]])
        dst_idx = np.concatenate([pairs[:, 1], pairs[:, 0]])
        q = pairs.shape[0]
    else:
        sim.virtual_primitive(n_pairs, 2)
        mat = np.zeros((n_sets, elements.shape[0]), dtype=np.float32)
        mat[np.repeat(np.arange(n_sets), b), pos.ravel()] = 1.0
        adj = (mat.T @ mat) > 0
        del mat
        np.fill_diagonal(adj, False)
        deg = adj.sum(axis=1)
        maxdeg = int(deg.max()) if deg.size else 0
        _check_degree(maxdeg, b)
        return ConflictGraph(elements, None, None, maxdeg, int(deg.sum()) // 2, matrix=adj)
    deg = np.bincount(src, minlength=elements.shape[0])
    maxdeg = int(deg.max()) if deg.size else 0
    _check_degree(maxdeg, b)
    order = np.argsort(src, kind="stable")
    return ConflictGraph(elements, src[order], elements[dst_idx[order]], maxdeg, q)


def _scan(spec, ranks, set_pos, n_heavy, tau, window, scan_all, max_seeds, sim):
    """Walk seeds in order; return (best_index, best_size, scanned, sizes)."""
    n_sets, b = set_pos.shape
    per_seed = max(1, ranks.shape[0] + n_sets * b)
    batch = max(1, min(256, TABLE_CELLS // per_seed))
    stop = spec.size if max_seeds is None else min(spec.size, max_seeds)
    best_idx, best_size = None, None
    scanned = 0
    sizes = []
    for idx, table in iter_tables(spec, ranks, batch=batch, stop=stop):
        sampled = table == 0
        hit = sampled[:, set_pos].any(axis=2)
        size = n_heavy + sampled.sum(axis=1) + (~hit).sum(axis=1)
        if scan_all:
            sizes.append(size)
        for j in range(idx.shape[0]):
            scanned += 1
            if best_size is None or size[j] < best_size:
                best_idx, best_size = int(idx[j]), int(size[j])
            if not scan_all and scanned >= window and best_size <= tau:
                break
        else:
            continue
        break
    sim.charge(0, scanned * per_seed)
    sim.aggregate_seeds(scanned)
    return best_idx, best_size, scanned, (np.concatenate(sizes) if scan_all else None)


def derand_hitting_set(inst: HittingSetInstance, sim: Simulator | None = None,
                       scan_all: bool = False, max_seeds: int | None = None,
                       window: int = MIN_WINDOW, compact: bool = True) -> HittingSetResult:
    """Hitting set of size at most about n p + n/(b p) + |heavy|.

    The seed scan looks at >= ``window`` seeds and stops at the first point
    where the best size seen is within tau = |heavy| + 2 (bound - |heavy|);
    the smallest L_h so far (earliest on ties) wins.  ``scan_all`` evaluates
    the whole family and keeps every size; ``max_seeds`` caps the scan, after
    which the always-valid fallback heavy + all surviving indices is used.
    ``compact`` renames the colors to 0..C'-1 before hashing (needed to make
    the family small enough to enumerate).
    """
    if sim is None:
        sim = Simulator(standalone_config(inst.n, inst.b))
    owners = np.arange(1, inst.n + 1, dtype=np.int64)
    return hitting_set_of(inst.sets, owners, inst.n, sim, scan_all=scan_all,
                          max_seeds=max_seeds, window=window, compact=compact)


def hitting_set_of(sets: np.ndarray, owners: np.ndarray, n_ids: int, sim: Simulator,
                   scan_all: bool = False, max_seeds: int | None = None,
                   window: int = MIN_WINDOW, compact: bool = True) -> HittingSetResult:
    """``derand_hitting_set`` on sets over arbitrary IDs in [1, n_ids].

    Row j is the set of ``owners[j]``, which it must contain; owners are
    distinct.  An unhit set is repaired with its owner.
    """
    sets = np.asarray(sets, dtype=np.int64)
    owners = np.asarray(owners, dtype=np.int64)
    b = sets.shape[1]
    ell = output_bits(b)
    p = 2.0 ** -ell
    with sim.phase("hitset"):
        heavy, surviving = _heavy(sets, b, sim)
        live = sets[surviving]
        n_sets = live.shape[0]
        if n_sets == 0:
            return HittingSetResult(heavy.copy(), None, False, heavy, np.zeros(0, np.int64),
                                    np.zeros(0, np.int64), p, ell, float(len(heavy)),
                                    float(len(heavy)), extra={"surviving": 0})
        cg = build_conflict_graph(live, sim)
        n_elems = cg.elements.shape[0]
        if cg.max_degree > sim.S:
            raise CapacityError(f"conflict degree {cg.max_degree} exceeds local capacity {sim.S}",
                                words=cg.max_degree, capacity=sim.S)
        colors, evals, params = cg.color(n_ids)
        sim.charge(0, evals)
        if compact:
            ranks, ncol = dense_rank(colors, sim)
        else:
            ranks, ncol = colors, params.num_colors
        spec = scattered_family(ncol, ell, K)
        points = scatter(spec, ranks)

        bound = len(heavy) + n_elems * p + n_sets / (b * p)
        tau = len(heavy) + 2 * (bound - len(heavy))
        set_pos = np.searchsorted(cg.elements, live)
        best_idx, best_size, scanned, sizes = _scan(
            spec, points, set_pos, len(heavy), tau, window, scan_all, max_seeds, sim)

        fallback = best_size is None or best_size > tau
        if fallback:
            sampled = np.zeros(0, np.int64)
            altered = owners[surviving]
            seed = None
        else:
            seed = seed_at(spec, best_idx)
            # marking is record-local: every element evaluates h on its own color
            mark = eval_table(spec, [best_idx], points)[0] == 0
            sampled = cg.elements[mark]
            altered = owners[surviving][~mark[set_pos].any(axis=1)]
        hitters = np.unique(np.concatenate([heavy, sampled, altered]))
        if not fallback and hitters.shape[0] != best_size:
            raise InvariantError("hitting set size disagrees with the scan")
    return HittingSetResult(
        hitters=hitters, seed=seed, fallback=fallback, heavy=heavy, altered=altered,
        sampled=sampled, p_effective=p, ell=ell, bound=bound, tau=tau,
        seeds_scanned=scanned, family_size=spec.size, sizes_by_seed=sizes,
        extra={"surviving": n_sets, "elements": n_elems, "colors_used": ncol,
               "conflict_max_degree": cg.max_degree, "conflict_pairs": cg.pairs,
               "p_field": params.p, "seed_bits": spec.seed_bits},
    )


# --- instances -----------------------------------------------------------------

def random_instance(n: int, b: int, seed: int = 0) -> HittingSetInstance:
    """Set i is i plus b-1 distinct uniform others."""
    if b > n:
        raise ValueError("b cannot exceed n")
    rng = np.random.Generator(np.random.Philox(key=seed))
    rows = np.empty((n, b), dtype=np.int64)
    for i in range(n):
        others = rng.choice(n - 1, size=b - 1, replace=False) + 1
        others[others >= i + 1] += 1
        rows[i, 0] = i + 1
        rows[i, 1:] = others
    return HittingSetInstance(n, b, rows)


def parse_instance(text: str) -> HittingSetInstance:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty instance")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError("first line must be 'n b'")
    n, b = int(head[0]), int(head[1])
    if len(lines) - 1 != n:
        raise ValueError(f"expected {n} set lines, got {len(lines) - 1}")
    rows = []
    for k, ln in enumerate(lines[1:], 1):
        vals = [int(x) for x in ln.split()]
        if len(vals) != b:
            raise ValueError(f"set {k}: expected {b} elements, got {len(vals)}")
        rows.append(vals)
    return HittingSetInstance(n, b, np.asarray(rows, dtype=np.int64).reshape(n, b))


def format_instance(inst: HittingSetInstance) -> str:
    out = [f"{inst.n} {inst.b}"]
    out.extend(" ".join(map(str, row)) for row in inst.sets.tolist())
    return "\n".join(out) + "\n"


def read_instance(path) -> HittingSetInstance:
    return parse_instance(Path(path).read_text())


def size_guard(n: int, b: int) -> float:
    """Empirical regression ceiling 4 n b^(-1/5) + n/b."""
    return 4 * n * b ** (-0.2) + n / b


def expected_bound(n_heavy: int, n_elems: int, n_sets: int, b: int, ell: int) -> float:
    p = 2.0 ** -ell
    return n_heavy + n_elems * p + n_sets / (b * p)


__all__ = [
    "ConflictGraph", "HittingSetInstance", "HittingSetResult", "build_conflict_graph",
    "derand_hitting_set", "expected_bound", "hitting_set_of", "format_instance", "output_bits", "parse_instance",
    "preprocess_heavy", "random_instance", "read_instance", "size_guard", "standalone_config",
]

"""Connected components in two phases.

Phase A shrinks the vertex set.  Every vertex points at its smallest
neighbor; those pointers form a forest whose only cycles are mutual pairs,
and the smaller end of each pair is a root.  The forest is colored, a
pairwise independent h: [C] -> {0,1} is searched, and every non-root v with
h(c(v)) = 1 and h(c(parent)) = 0 is contracted into its parent.  A non-root
is contracted with probability 1/4 over the family and at least half the
live vertices are non-roots, so some seed contracts ceil(n'/8) of them.

Phase B runs levels.  At budget beta each vertex grows its neighbor list
to beta IDs by adopting smallest IDs two hops away (a vertex whose
neighborhood stops changing has seen its whole component and retires), a
hitting set over the lists picks leaders, and everyone else contracts into
the smallest leader it knows.  The budget then grows for the next level.

Every contraction is logged as (vertex, target, stamp) and the final labels
come from pointer jumping over the log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coloring import kuhn_colors, make_params
from .errors import InvariantError
from .finite_field import ceil_log2
from .graph import normalize_edges
from .hash_family import eval_table, iter_tables, scatter, scattered_family
from .hitting_set import hitting_set_of
from .mpc import Metrics, MpcConfig, Simulator

SEED_CELLS = 1 << 21


@dataclass(frozen=True)
class PipelineConfig:
    delta: float = 0.5
    gamma: float = 0.2
    c: int = 3
    kappa_global: float = 8.0
    unsafe: bool = False
    max_levels: int = 64

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.c < 1 or (self.c < 3 and not self.unsafe):
            raise ValueError("c must be >= 3 (pass unsafe to go lower)")

    @property
    def epsilon(self) -> float:
        return self.delta / self.c


@dataclass
class BudgetState:
    """One budget per level; all active vertices share the current level."""

    n: int
    gamma: float
    c: int
    epsilon: float
    cap: int
    beta: list = field(default_factory=list)
    level: int = 0

    def start(self, m: int, n_active: int) -> int:
        ratio = m / max(n_active, 1)
        b0 = max(2, math.ceil(ratio ** (1.0 / (2 * self.c)) - 1e-12))
        self.beta = [min(self.cap, b0)]
        self.level = 0
        return self.beta[0]

    @property
    def current(self) -> int:
        return self.beta[self.level]

    def grow(self, b: int) -> int:
        ne = math.ceil(self.n ** self.epsilon - 1e-12)
        step = math.floor(b * min(b, ne) ** (self.gamma / (4 * self.c)) + 1e-12)
        return min(self.cap, max(b + 1, step))

    def advance(self, stalled: bool = False) -> int:
        """Next level's budget.  A level that contracted nothing (every active
        vertex a leader, as in a clique of at most cap + 1 vertices) steps
        past the cap so the next expansion can close the component."""
        b = self.current
        self.beta.append(b + 1 if stalled else self.grow(b))
        self.level += 1
        return self.current


class ContractionLog:
    """Events (vertex, target, stamp); a fresh stamp per contraction step."""

    WORDS_PER_EVENT = 3

    def __init__(self):
        self._chunks: list[np.ndarray] = []
        self.stamp = 0
        self.component_of: np.ndarray | None = None

    def add(self, vertices, targets) -> int:
        v = np.asarray(vertices, dtype=np.int64)
        t = np.asarray(targets, dtype=np.int64)
        self.stamp += 1
        if v.size:
            if np.any(v == t):
                raise InvariantError("vertex contracted into itself")
            # absorbers are never absorbed in the same step
            if np.isin(t, v).any():
                raise InvariantError("target contracted in the same step")
            self._chunks.append(np.stack([v, t, np.full_like(v, self.stamp)], axis=1))
        return self.stamp

    def events(self) -> np.ndarray:
        if not self._chunks:
            return np.zeros((0, 3), dtype=np.int64)
        return np.concatenate(self._chunks)

    def __len__(self) -> int:
        return sum(c.shape[0] for c in self._chunks)

    @property
    def words(self) -> int:
        return self.WORDS_PER_EVENT * len(self)


@dataclass
class PipelineResult:
    labels: np.ndarray          # labels[i] for vertex i + 1
    metrics: Metrics
    log: ContractionLog
    phase_a_trace: list = field(default_factory=list)
    phase_b_trace: list = field(default_factory=list)
    state_log: list = field(default_factory=list)

    def label_map(self) -> dict[int, int]:
        return {i + 1: int(x) for i, x in enumerate(self.labels.tolist())}


# --- helpers -----------------------------------------------------------------------

def _orient(rows: np.ndarray) -> tuple[np.ndarray]:
    rows = np.sort(rows, axis=1)
    return (rows[rows[:, 0] != rows[:, 1]],)


def _relabel_edges(edges: np.ndarray, verts: np.ndarray, new_label: np.ndarray,
                   sim: Simulator) -> np.ndarray:
    """Rewrite both endpoints through ``verts -> new_label``, drop loops, dedup."""
    ends = sim.lookup(verts, new_label, edges.ravel(), table_sorted=True)
    if np.any(ends < 0):
        raise InvariantError("edge endpoint missing from the vertex table")
    (rows,) = sim.local(_orient, ends.reshape(-1, 2), ops_per_record=2)
    if rows.shape[0] == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return sim.dedup(rows)


def _assert_forest(verts: np.ndarray, parent: np.ndarray) -> None:
    """Pointer jumping must bring every vertex to a root (parent == self)."""
    idx = np.searchsorted(verts, parent)
    if np.any(verts[idx] != parent):
        raise InvariantError("parent outside the live vertex set")
    cur = idx
    for _ in range(ceil_log2(verts.shape[0]) + 2):
        nxt = cur[cur]
        if np.array_equal(nxt, cur):
            break
        cur = nxt
    if not np.array_equal(cur[cur], cur) or np.any(parent[cur] != verts[cur]):
        raise InvariantError("min-ID pointers contain a cycle")


def _live_count(edges: np.ndarray) -> int:
    return int(np.unique(edges).shape[0]) if edges.size else 0


# --- phase A ------------------------------------------------------------------

def _min_neighbors(edges: np.ndarray, sim: Simulator) -> tuple[np.ndarray, np.ndarray]:
    """Live vertices (sorted) and their smallest neighbors."""
    arcs = sim.sort(np.concatenate([edges, edges[:, ::-1]]))
    rank = sim.group_rank(arcs[:, 0])
    first = rank == 0
    return arcs[first, 0], arcs[first, 1]


def _absorbed(table: np.ndarray, nonroot: np.ndarray, n_live: int) -> np.ndarray:
    hv, hf = table[:, :n_live], table[:, n_live:]
    return nonroot[None, :] & (hv == 1) & (hf == 0)


def phase_a_iteration(edges: np.ndarray, n_ids: int, sim: Simulator, log: ContractionLog,
                      verts: np.ndarray | None = None, f: np.ndarray | None = None):
    """One contraction step on the min-ID forest.  Returns (edges', info)."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.shape[0] == 0:
        return edges, {"n_live": 0, "absorbed": 0, "seeds": 0, "target": 0}
    if verts is None:
        verts, f = _min_neighbors(edges, sim)
    n_live = verts.shape[0]

    # each vertex avoids its pointer's curve, so every forest edge is bichromatic
    params = make_params(n_ids, 1)
    colors, evals = kuhn_colors(verts, np.arange(n_live), f, params)
    sim.charge(0, evals)
    info = sim.lookup(verts, np.stack([f, colors], axis=1), f, table_sorted=True)
    ff, fcol = info[:, 0], info[:, 1]
    root = (ff == verts) & (verts < f)
    parent = np.where(root, verts, f)
    _assert_forest(verts, parent)
    nonroot = ~root
    if 2 * int(nonroot.sum()) < n_live:
        raise InvariantError("fewer than half the live vertices are non-roots")

    spec = scattered_family(params.num_colors, 1, 2)
    target = math.ceil(n_live / 8)
    xs = scatter(spec, np.concatenate([colors, fcol]))
    batch = max(1, min(64, SEED_CELLS // xs.shape[0]))
    winner, scanned = None, 0
    for idx, table in iter_tables(spec, xs, batch=batch):
        sizes = _absorbed(table, nonroot, n_live).sum(axis=1)
        ok = np.flatnonzero(sizes >= target)
        if ok.size:
            winner = int(idx[ok[0]])
            scanned += int(ok[0]) + 1
            break
        scanned += idx.shape[0]
    sim.charge(0, scanned * xs.shape[0])
    sim.aggregate_seeds(scanned)
    if winner is None:
        raise InvariantError("no seed absorbs ceil(n'/8) vertices")

    (absorbed,) = sim.local(
        lambda c, fc, nr: (_absorbed(eval_table(spec, [winner], np.concatenate([c, fc])),
                                     nr, c.shape[0])[0],),
        xs[:n_live], xs[n_live:], nonroot, ops_per_record=2)
    log.add(verts[absorbed], f[absorbed])
    sim.hold("events", log.words)
    new_label = np.where(absorbed, f, verts)
    out = _relabel_edges(edges, verts, new_label, sim)
    k = int(absorbed.sum())
    left = _live_count(out)
    if n_live - left < target:
        raise InvariantError(f"phase A removed {n_live - left} of {n_live}, need {target}")
    return out, {"n_live": n_live, "absorbed": k, "seeds": scanned, "target": target,
                 "n_after": left, "m_before": int(edges.shape[0]), "m_after": int(out.shape[0])}


def phase_a(edges: np.ndarray, n_ids: int, sim: Simulator, log: ContractionLog,
            trace: list | None = None) -> np.ndarray:
    """Contract until the live count is at most n0 / ceil(log2 n0) or the
    graph is dense (m >= n' ceil(log2 n0)).  Isolated vertices simply stay
    as their own components."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.shape[0] == 0:
        return edges
    n0 = _live_count(edges)
    sim.dedup(edges.ravel())
    lg = max(1, ceil_log2(n0))
    while edges.shape[0]:
        verts, f = _min_neighbors(edges, sim)
        n_live = verts.shape[0]
        if n_live * lg <= n0 or edges.shape[0] >= n_live * lg:
            break
        edges, info = phase_a_iteration(edges, n_ids, sim, log, verts, f)
        sim.metrics.bump("phase_a_iterations")
        sim.metrics.bump("phase_a_seeds", info["seeds"])
        if trace is not None:
            trace.append(info)
    return edges


# --- phase B ------------------------------------------------------------------

def _arcs(edges: np.ndarray, sim: Simulator) -> np.ndarray:
    if edges.shape[0] == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return sim.dedup(np.concatenate([edges, edges[:, ::-1]]))


def _groups(arcs: np.ndarray, sim: Simulator):
    """Per-arc rank within its source, plus sorted sources and degrees."""
    rank = sim.group_rank(arcs[:, 0])
    first = np.flatnonzero(rank == 0)
    verts = arcs[first, 0]
    deg = np.diff(np.append(first, arcs.shape[0]))
    return rank, verts, deg, first


def expand_neighborhood(arcs: np.ndarray, beta: int, sim: Simulator, log: ContractionLog,
                        n_ids: int, stats: dict | None = None):
    """Grow every list to ``beta`` neighbors by two-hop adoption.

    ``arcs`` holds both directions, sorted and distinct.  Each unsaturated
    vertex v (degree < beta) is offered every neighbor u together with u's
    beta + 1 smallest neighbors and keeps the beta smallest IDs seen.  If
    nothing new is offered, N[v] is closed under adjacency, hence all of
    v's component: the component retires with label min N[v].  Returns
    (arcs, rank, verts, deg, first) of the saturated remainder.
    """
    steps = 0
    while True:
        if arcs.shape[0] == 0:
            if stats is not None:
                stats["expand_steps"] = stats.get("expand_steps", 0) + steps
            empty = np.zeros(0, np.int64)
            return arcs, empty, empty, empty, empty
        rank, verts, deg, first = _groups(arcs, sim)
        unsat = deg < beta
        if not unsat.any():
            if stats is not None:
                stats["expand_steps"] = stats.get("expand_steps", 0) + steps
            return arcs, rank, verts, deg, first
        steps += 1
        if steps > beta + 1:
            raise InvariantError("neighborhood expansion does not converge")
        src_unsat = np.repeat(unsat, deg)
        sim.hold("arcs", arcs.size)

        # u's offer: u itself and its beta + 1 smallest neighbors
        trunc = arcs[rank <= beta]
        t_first = np.flatnonzero(np.r_[True, trunc[1:, 0] != trunc[:-1, 0]])
        t_len = np.diff(np.append(t_first, trunc.shape[0]))
        req = arcs[src_unsat]
        where = sim.lookup(trunc[t_first, 0], np.stack([t_first, t_len], axis=1),
                           req[:, 1], table_sorted=True)
        lens = where[:, 1]
        offs = sim.prefix_sum(lens)
        total = int(lens.sum())
        owner = np.repeat(np.arange(req.shape[0]), lens)
        inner = np.arange(total) - np.repeat(offs, lens)
        offered = trunc[np.repeat(where[:, 0], lens) + inner, 1]
        # (v, 2w + tag): tag 0 marks a current neighbor, tag 1 an offered ID,
        # so one sort orders by w with the current copy first
        cand = np.concatenate([
            np.stack([req[:, 0], 2 * req[:, 1]], axis=1),
            np.stack([req[owner, 0], 2 * offered + 1], axis=1),
        ])
        cand = cand[cand[:, 0] != cand[:, 1] >> 1]
        cand = sim.sort(cand)
        # one fused pass: first row per (v, w), rank among distinct w, new-ID count
        w = cand[:, 1] >> 1
        key_change = np.r_[True, (cand[1:, 0] != cand[:-1, 0]) | (w[1:] != w[:-1])]
        uniq = np.stack([cand[key_change, 0], w[key_change], cand[key_change, 1] & 1], axis=1)
        v_start = np.r_[True, uniq[1:, 0] != uniq[:-1, 0]]
        grp = np.cumsum(v_start) - 1
        pos = np.arange(uniq.shape[0]) - np.flatnonzero(v_start)[grp]
        is_new = uniq[:, 2] == 1
        new_cnt = np.bincount(grp, weights=is_new, minlength=int(v_start.sum()))
        sim.segmented([cand], [cand[key_change], pos, new_cnt])
        cand_verts = uniq[v_start, 0]

        fin_v = cand_verts[new_cnt == 0]
        add = uniq[is_new & (pos < beta)][:, :2]
        if fin_v.size:
            # N[v] is the whole component; retire all of it under its smallest member
            vi = np.searchsorted(verts, fin_v)
            low = np.minimum(fin_v, arcs[first[vi], 1])
            row_low = sim.lookup(fin_v, low, arcs[:, 0], default=0, table_sorted=True)
            sel = row_low > 0
            members = np.concatenate([
                np.stack([fin_v, low], axis=1),
                np.stack([arcs[sel, 1], row_low[sel]], axis=1)])
            members = sim.dedup(members)
            if np.unique(members[:, 0]).shape[0] != members.shape[0]:
                raise InvariantError("finished vertex sees two component minima")
            move = members[:, 0] != members[:, 1]
            log.add(members[move, 0], members[move, 1])
            sim.hold("events", log.words)
            sim.metrics.bump("finished_components", int((~move).sum()))
            done = sim.lookup(members[:, 0], np.ones(members.shape[0], np.int64), arcs[:, 0],
                              default=0, table_sorted=True)
            keep = arcs[done == 0]
            add = add[~np.isin(add[:, 0], members[:, 0])]
            if np.any(np.isin(keep[:, 1], members[:, 0])):
                raise InvariantError("retired component still has live neighbors")
        else:
            keep = arcs
        merged = np.concatenate([keep, add, add[:, ::-1]])
        sim.release("arcs")
        arcs = sim.dedup(merged) if merged.shape[0] else np.zeros((0, 2), np.int64)
        sim.metrics.high("max_arcs", int(arcs.shape[0]))


def elect_and_contract(arcs: np.ndarray, beta: int, groups, sim: Simulator,
                       log: ContractionLog, n_ids: int, stats: dict | None = None) -> np.ndarray:
    """Leaders by hitting set over the lists {v} + (beta - 1 smallest
    neighbors); non-leaders contract into the smallest leader they know."""
    rank, verts, deg, first = groups
    n_act = verts.shape[0]
    if n_act == 0:
        return arcs
    if np.any(deg < max(beta - 1, 1)):
        raise InvariantError("unsaturated vertex reached leader election")
    members = arcs[rank < beta - 1, 1].reshape(n_act, beta - 1)
    sets = np.concatenate([verts[:, None], members], axis=1)
    sim.hold("arcs", arcs.size)
    res = hitting_set_of(sets, verts, n_ids, sim, compact=False)
    sim.release("arcs")
    is_leader = sim.lookup(res.hitters, np.ones(res.hitters.shape[0], np.int64),
                           sets.ravel(), default=0, table_sorted=True).reshape(sets.shape)
    if not is_leader.any(axis=1).all():
        raise InvariantError("a set holds no leader")
    # rows are v then ascending neighbors; the first leader column wins
    # unless v leads itself
    member_lead = is_leader[:, 1:]
    col = np.argmax(member_lead, axis=1) if beta > 1 else np.zeros(n_act, np.int64)
    target = np.where(is_leader[:, 0] == 1, verts,
                      members[np.arange(n_act), col] if beta > 1 else verts)
    move = target != verts
    log.add(verts[move], target[move])
    sim.hold("events", log.words)
    sim.metrics.bump("leaders", int((~move).sum()))
    if stats is not None:
        stats.update(leaders=int((~move).sum()), active=n_act,
                     hitset_seeds=res.seeds_scanned, hitset_fallback=res.fallback,
                     heavy=int(res.heavy.shape[0]))
    sim.metrics.bump("hitset_seeds", res.seeds_scanned)
    edges = arcs[arcs[:, 0] < arcs[:, 1]]
    out = _relabel_edges(edges, verts, target, sim)
    return _arcs(out, sim)


def phase_b(edges: np.ndarray, n_ids: int, sim: Simulator, log: ContractionLog,
            cfg: PipelineConfig, trace: list | None = None) -> None:
    arcs = _arcs(edges, sim)
    if arcs.shape[0] == 0:
        return
    n_active = int(np.unique(arcs[:, 0]).shape[0])
    cap = max(2, int(round(sim.S ** (1.0 / 3.0))))
    while cap ** 3 > sim.S:
        cap -= 1
    budget = BudgetState(n=n_ids, gamma=cfg.gamma, c=cfg.c, epsilon=cfg.epsilon, cap=max(cap, 2))
    beta = budget.start(edges.shape[0], n_active)
    while True:
        stats = {"level": budget.level, "beta": beta}
        arcs, *groups = expand_neighborhood(arcs, beta, sim, log, n_ids, stats)
        if arcs.shape[0] == 0:
            if trace is not None:
                trace.append(stats)
            break
        arcs = elect_and_contract(arcs, beta, groups, sim, log, n_ids, stats)
        if trace is not None:
            trace.append(stats)
        sim.metrics.high("beta_max", beta)
        stalled = stats["leaders"] == stats["active"]
        if stalled:
            sim.metrics.bump("stalled_levels")
        beta = budget.advance(stalled)
        sim.metrics.high("levels", budget.level)
        if budget.level > cfg.max_levels:
            raise InvariantError(f"level count exceeded {cfg.max_levels}")
        if arcs.shape[0] == 0:
            break


# --- labels -------------------------------------------------------------------

def resolve_labels(events, n: int, sim: Simulator | None = None) -> np.ndarray:
    """Follow contraction pointers to their terminal representative.

    Pointer jumping halves every chain per join, so ceil(log2 n) + 2 joins
    reach the fixed point on an acyclic log; more means a cycle.
    """
    ev = np.asarray(events, dtype=np.int64).reshape(-1, 3)
    label = np.arange(n + 1, dtype=np.int64)
    if ev.shape[0]:
        src = ev[:, 0]
        if np.unique(src).shape[0] != src.shape[0]:
            raise InvariantError("vertex contracted twice")
        label[src] = ev[:, 1]
    keys = np.arange(n + 1, dtype=np.int64)
    for _ in range(ceil_log2(max(n, 1)) + 2):
        if sim is not None:
            nxt = sim.lookup(keys, label, label, table_sorted=True)
        else:
            nxt = label[label]
        if np.array_equal(nxt, label):
            # a contracted vertex that is its own representative sat on a cycle
            if ev.shape[0] and np.any(label[ev[:, 0]] == ev[:, 0]):
                raise InvariantError("contraction log contains a cycle")
            return label[1:].copy()
        label = nxt
    raise InvariantError("contraction log contains a cycle")


# --- driver -------------------------------------------------------------------

def simulator_for(n: int, m: int, cfg: PipelineConfig, **kw) -> Simulator:
    mc = MpcConfig(delta=cfg.delta, input_words=max(1, n + m), kappa_global=cfg.kappa_global)
    return Simulator(mc, **kw)


def run_components(edges, n: int, cfg: PipelineConfig | None = None,
                   sim: Simulator | None = None, **sim_kw) -> PipelineResult:
    cfg = cfg or PipelineConfig()
    e = normalize_edges(edges)
    if e.size and int(e.max()) > n:
        raise ValueError("edge endpoint exceeds n")
    if sim is None:
        sim = simulator_for(n, e.shape[0], cfg, **sim_kw)
    log = ContractionLog()
    trace_a: list = []
    trace_b: list = []
    sim.hold("labels", n)
    with sim.phase("phase_a"):
        rest = phase_a(e, n, sim, log, trace_a)
    with sim.phase("phase_b"):
        phase_b(rest, n, sim, log, cfg, trace_b)
    with sim.phase("resolve"):
        labels = resolve_labels(log.events(), n, sim)
    log.component_of = labels
    sim.metrics.high("levels", 0)
    sim.metrics.high("phase_a_iterations", 0)
    sim.metrics.bump("contraction_events", len(log))
    sim.metrics.counters["local_words"] = sim.S
    sim.metrics.counters["global_words"] = sim.global_cap
    return PipelineResult(labels, sim.metrics, log, trace_a, trace_b, sim.state_log)


def connected_components(edges, n: int, cfg: PipelineConfig | None = None,
                         **sim_kw) -> tuple[np.ndarray, Metrics]:
    """Labels (index i for vertex i + 1) constant exactly on components."""
    res = run_components(edges, n, cfg, **sim_kw)
    return res.labels, res.metrics

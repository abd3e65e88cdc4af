"""The ten acceptance criteria.  Each test prints one [PASS]/[FAIL] line
and then asserts."""

import itertools
import json
import math
import time

import numpy as np
import pytest

from mpcconn import graph, oracle
from mpcconn.cli import main
from mpcconn.coloring import color_graph, dense_rank, prime_interval
from mpcconn.connectivity import PipelineConfig, run_components, simulator_for
from mpcconn.hash_family import enumerate_seeds, eval as h_eval, eval_table, make_family
from mpcconn.hitting_set import (ConflictGraph, derand_hitting_set, random_instance, size_guard)
from mpcconn.matching import ELL, K, color_edges, derand_matching


def build(spec):
    kind, kw = graph.parse_spec(spec)
    edges, n = graph.generate(kind, **kw)
    return graph.normalize_edges(edges), n


@pytest.fixture(scope="module")
def corpus_runs():
    """Every corpus graph through the pipeline once, with wall time."""
    t0 = time.perf_counter()
    runs = []
    for spec in graph.corpus():
        edges, n = build(spec)
        runs.append((spec, edges, n, run_components(edges, n)))
    return runs, time.perf_counter() - t0


# 1 -------------------------------------------------------------------------------

def test_c1_partition_correctness(corpus_runs, report):
    runs, seconds = corpus_runs
    wrong = [spec for spec, edges, n, res in runs
             if not oracle.same_partition(res.labels.tolist(), oracle.components(edges, n)[1:])]
    max_n = max(n for _, _, n, _ in runs)
    max_m = max(e.shape[0] for _, e, _, _ in runs)
    ok = len(runs) >= 200 and not wrong and seconds < 300
    report("C1 correctness suite", ok,
           f"{len(runs)} graphs, n<={max_n}, m<={max_m}, {len(wrong)} wrong, {seconds:.1f}s")
    assert len(runs) >= 200 and max_n <= 1 << 14 and max_m <= 1 << 16
    assert not wrong, wrong[:5]
    assert seconds < 300


# 2 -------------------------------------------------------------------------------

def _degree2_graph(seed):
    rng = np.random.default_rng(seed)
    parts, n = [], 0
    target = int(rng.integers(10, 400))
    while n < target:
        size = int(rng.integers(2, 40))
        cyc = size >= 3 and rng.random() < 0.5
        parts.append(graph.cycle_graph(size) if cyc else graph.path_graph(size))
        n += size
    edges, n = graph.union_graph(parts)
    return graph.relabel(edges, n, seed)


def _brute_matching_sizes(edges):
    """|M(h)| for every seed straight from the rule: e is kept when h(c(e)) == 0
    and no edge sharing an endpoint also hashes to 0."""
    edges = [tuple(e) for e in edges.tolist()]
    ranks, ncol = dense_rank(color_edges(np.array(edges)).colors)
    spec = make_family(ncol, ELL, K)
    incident = {}
    for i, (u, v) in enumerate(edges):
        incident.setdefault(u, []).append(i)
        incident.setdefault(v, []).append(i)
    sizes = []
    for seed in enumerate_seeds(spec):
        zero = [h_eval(spec, seed, int(r)) == 0 for r in ranks]
        kept = sum(1 for i, (u, v) in enumerate(edges) if zero[i]
                   and not any(zero[j] for j in incident[u] + incident[v] if j != i))
        sizes.append(kept)
    return sizes


def test_c2_matching(report):
    bad = []
    for seed in range(100):
        edges, n = _degree2_graph(seed)
        m = graph.normalize_edges(edges).shape[0]
        res = derand_matching(edges)
        if not oracle.is_matching(res.edges) or res.size < math.ceil(m / 8):
            bad.append(seed)
    small = [graph.cycle_graph(16)[0], graph.path_graph(25)[0], graph.two_cycles_graph(24)[0],
             graph.union_graph([graph.path_graph(7), graph.cycle_graph(9), graph.path_graph(3)])[0],
             graph.cycle_graph(5)[0]]
    short = []
    for edges in small:
        e = graph.normalize_edges(edges)
        assert e.shape[0] <= 24
        sizes = _brute_matching_sizes(e)
        if 8 * sum(sizes) < e.shape[0] * len(sizes):
            short.append(e.shape[0])
    ok = not bad and not short
    report("C2 matching", ok, f"100 graphs, {len(bad)} below m/8; "
           f"{len(small)} enumerated families, {len(short)} averages below m/8")
    assert ok


# 3 -------------------------------------------------------------------------------

def test_c3_hitting_set(report):
    inst = random_instance(256, 8, seed=0)
    res = derand_hitting_set(inst, scan_all=True)
    counts = np.bincount(inst.sets.ravel(), minlength=inst.n + 1)
    heavy = int((counts >= inst.b ** 2).sum())
    elements, surviving = res.extra["elements"], res.extra["surviving"]
    p = 2.0 ** -res.ell
    bound = heavy + elements * p + surviving / (inst.b * p)
    avg = float(np.mean(res.sizes_by_seed))
    avg_ok = (res.sizes_by_seed.shape[0] == res.family_size and heavy == res.heavy.shape[0]
              and avg <= bound)
    valid = oracle.hits_all(inst.sets.tolist(), res.hitters)
    guards = []
    for b in (32, 243, 1024):
        inst_b = random_instance(1 << 12, b, seed=1)
        r = derand_hitting_set(inst_b)
        valid &= oracle.hits_all(inst_b.sets.tolist(), r.hitters)
        guards.append((b, r.size, round(size_guard(1 << 12, b), 1)))
    guard_ok = all(size <= g for _, size, g in guards)
    ok = avg_ok and valid and guard_ok
    report("C3 hitting set", ok, f"mean |L_h| {avg:.3f} <= {bound:.3f} over {res.family_size} "
           f"seeds; (b, |L|, guard) {guards}; valid={valid}")
    assert avg_ok and valid and guard_ok


# 4 -------------------------------------------------------------------------------

def test_c4_pairwise_independence(report):
    checked, bad = 0, []
    for r in range(1, 6):
        n = 1 << r
        for ell in range(1, r + 1):
            spec = make_family(n, ell, 2)
            table = eval_table(spec, np.arange(spec.size), np.arange(n))
            outs = 1 << ell
            want = 1 << (2 * r - 2 * ell)
            for x, y in itertools.combinations(range(n), 2):
                hist = np.bincount(table[:, x] * outs + table[:, y], minlength=outs * outs)
                checked += 1
                if not (hist == want).all():
                    bad.append((r, ell, x, y))
    report("C4 pairwise independence", not bad, f"{checked} point pairs, {len(bad)} skewed")
    assert not bad


# 5 -------------------------------------------------------------------------------

def _proper(edges, colors):
    return all(colors[u] != colors[v] for u, v in edges)


def _params_ok(params, n_ids, max_deg):
    lo, hi = prime_interval(n_ids, max_deg)
    return lo <= params.p <= hi and params.delta * params.d < params.p


def test_c5_coloring(corpus_runs, report, monkeypatch):
    runs, _ = corpus_runs
    bad_graphs = []
    for spec, edges, n, _ in runs:
        adj = {v: [] for v in range(1, n + 1)}
        for u, v in edges.tolist():
            adj[u].append(v)
            adj[v].append(u)
        col = color_graph(adj, n)
        deg = max((len(x) for x in adj.values()), default=0)
        if not (_proper(edges.tolist(), col.colors) and _params_ok(col.params, n, deg)):
            bad_graphs.append(spec)

    # every conflict graph the hitting-set module colors, from standalone
    # instances and from leader election inside the pipeline
    seen = []
    original = ConflictGraph.color

    def spy(self, n_ids):
        out = original(self, n_ids)
        seen.append((self, out, n_ids))
        return out

    monkeypatch.setattr(ConflictGraph, "color", spy)
    for n, b, s in [(256, 8, 0), (1 << 12, 32, 1), (500, 3, 2), (64, 64, 3), (1000, 10, 4)]:
        derand_hitting_set(random_instance(n, b, seed=s))
    for spec in ["gnm n=4000 m=16000 seed=1", "grid dims=64x64", "hypercube dim=11",
                 "cycle n=4096", "two_cycles n=2048"]:
        run_components(*build(spec))
    bad_conflict = 0
    for cg, (colors, _, params), n_ids in seen:
        cmap = dict(zip(cg.elements.tolist(), colors.tolist()))
        if not (_proper(cg.edges().tolist(), cmap) and _params_ok(params, n_ids, cg.max_degree)):
            bad_conflict += 1
    ok = not bad_graphs and not bad_conflict and len(seen) > 5
    report("C5 coloring", ok, f"{len(runs)} corpus graphs ({len(bad_graphs)} improper), "
           f"{len(seen)} conflict graphs ({bad_conflict} improper)")
    assert ok, bad_graphs[:5]


# 6 -------------------------------------------------------------------------------

def test_c6_space(corpus_runs, report):
    runs, _ = corpus_runs
    over, worst = [], 0.0
    for spec, edges, n, res in runs:
        mt = res.metrics
        cap = 8 * (n + edges.shape[0])
        S = mt.counters["local_words"]
        worst = max(worst, mt.peak_global / cap)
        if mt.peak_global > cap or mt.peak_local > S:
            over.append(spec)
    report("C6 space", not over, f"{len(runs)} graphs, worst peak_global / 8(n+m) = "
           f"{worst:.3f}, {len(over)} over")
    assert not over, over[:5]


# 7 -------------------------------------------------------------------------------

def test_c7_rounds(report):
    rows, bad = [], []
    for k in (8, 10, 12, 14):
        n = 1 << k
        loglog = math.log2(math.log2(n + 4)) + 1
        cyc = run_components(*build(f"cycle n={n}")).metrics.rounds
        cyc_bound = 10 * (math.log2(n // 2 + 2) + 1) * loglog
        flat_bound = 10 * loglog ** 2
        star = run_components(*build(f"star n={n}")).metrics.rounds
        cube = run_components(*build(f"hypercube dim={k}")).metrics.rounds
        rows.append((n, cyc, round(cyc_bound), star, cube, round(flat_bound)))
        if cyc > cyc_bound or star > flat_bound or cube > flat_bound:
            bad.append(n)
    report("C7 rounds", not bad, "(n, cycle, bound, star, hypercube, bound) " + str(rows))
    assert not bad


# 8 -------------------------------------------------------------------------------

def test_c8_ops_scaling(report):
    ops = []
    for k in range(10, 15):
        n = 1 << k
        ops.append(run_components(*build(f"gnm n={n} m={4 * n} seed=0")).metrics.total_ops)
    ratios = [b / a for a, b in zip(ops, ops[1:])]
    ok = all(r <= 2.5 for r in ratios)
    report("C8 ops scaling", ok, "doubling ratios " + ", ".join(f"{r:.3f}" for r in ratios))
    assert ok


# 9 -------------------------------------------------------------------------------

def test_c9_phase_a_progress(corpus_runs, report):
    runs, _ = corpus_runs
    iters = violations = 0
    for _, _, _, res in runs:
        for it in res.phase_a_trace:
            iters += 1
            if it["n_live"] - it["n_after"] < math.ceil(it["n_live"] / 8):
                violations += 1
    report("C9 phase A progress", violations == 0 and iters > 0,
           f"{iters} iterations, {violations} violations")
    assert iters > 0 and violations == 0


# 10 ------------------------------------------------------------------------------

def _cli_outputs(tmp_path, tag):
    g = tmp_path / f"g{tag}.txt"
    lab = tmp_path / f"l{tag}.txt"
    met = tmp_path / f"m{tag}.json"
    out = {}
    steps = {
        "gen": ["gen", "gnm", "n=300", "m=700", "--seed", "4", "--out", str(g)],
        "run": ["run", str(g), "--out", str(lab), "--metrics", str(met)],
        "verify": ["verify", str(lab), str(g), "--out", str(tmp_path / f"v{tag}")],
        "bench": ["bench", "--suite", "smoke", "--out", str(tmp_path / f"b{tag}")],
        "matching": ["matching", "--gen", "cycle n=500", "--out", str(tmp_path / f"x{tag}")],
        "hitset": ["hitset", "--random", "512", "8", "--out", str(tmp_path / f"h{tag}")],
    }
    for name, argv in steps.items():
        assert main(argv) == 0, name
    out["gen"] = g.read_bytes()
    out["run"] = lab.read_bytes() + met.read_bytes()
    for name, prefix in (("verify", "v"), ("bench", "b"), ("matching", "x"), ("hitset", "h")):
        out[name] = (tmp_path / f"{prefix}{tag}").read_bytes()
    assert json.loads(out["verify"])["status"] == "pass"
    return out


def test_c10_determinism(tmp_path, report):
    a, b = _cli_outputs(tmp_path, "a"), _cli_outputs(tmp_path, "b")
    cli_diff = [k for k in a if a[k] != b[k]]

    cfg = PipelineConfig()
    sched_diff = []
    for spec in ["path n=300", "star n=200", "grid dims=12x12", "two_cycles n=200",
                 "gnm n=250 m=500 seed=3 isolated=5"]:
        edges, n = build(spec)
        base = run_components(edges, n, faithful=True, record_states=True)
        P = simulator_for(n, edges.shape[0], cfg).P
        rng = np.random.default_rng(len(spec))
        for _ in range(10):
            sched = rng.permutation(P).tolist()
            res = run_components(edges, n, schedule=sched, faithful=True, record_states=True)
            if (res.state_log != base.state_log or res.labels.tolist() != base.labels.tolist()
                    or res.metrics.to_dict() != base.metrics.to_dict()):
                sched_diff.append(spec)
        assert base.state_log
    ok = not cli_diff and not sched_diff
    report("C10 determinism", ok, f"6 subcommands ({len(cli_diff)} differ), 5 graphs x 10 "
           f"schedules ({len(sched_diff)} differ)")
    assert ok, (cli_diff, sched_diff)

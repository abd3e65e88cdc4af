import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mpcconn import graph, oracle
from mpcconn.coloring import dense_rank
from mpcconn.errors import DegreeTooHigh
from mpcconn.hash_family import enumerate_seeds, eval, make_family
from mpcconn.matching import ELL, K, color_edges, derand_matching
from mpcconn.mpc import MpcConfig, Simulator


def degree2_graph(seed, n_max=60):
    """Disjoint paths and cycles with shuffled IDs."""
    rng = np.random.default_rng(seed)
    parts, n = [], 0
    while n < n_max:
        size = int(rng.integers(2, 12))
        parts.append(graph.cycle_graph(size) if size >= 3 and rng.random() < 0.5 else graph.path_graph(size))
        n += size
    edges, n = graph.union_graph(parts)
    return graph.relabel(edges, n, seed)


def line_adjacent(e, f):
    return e != f and bool(set(e) & set(f))


def brute_sizes(edges):
    """|M(h)| for every seed from the definition: h(c(e)) == 0 and no
    neighboring edge has h(c(e')) == 0."""
    edges = [tuple(x) for x in graph.normalize_edges(edges).tolist()]
    ec = color_edges(np.array(edges))
    ranks, ncol = dense_rank(ec.colors)
    spec = make_family(ncol, ELL, K)
    sizes = []
    for seed in enumerate_seeds(spec):
        marked = [eval(spec, seed, int(r)) == 0 for r in ranks]
        size = 0
        for i, e in enumerate(edges):
            if marked[i] and not any(marked[j] for j, f in enumerate(edges) if line_adjacent(e, f)):
                size += 1
        sizes.append(size)
    return sizes


def test_color_edges_examples():
    assert color_edges([[1, 2]]).colors.shape == (1,)
    c = color_edges([[1, 2], [2, 3]]).colors
    assert c[0] != c[1]
    edges, _ = graph.cycle_graph(16)
    ec = color_edges(edges)
    e = graph.normalize_edges(edges).tolist()
    for i in range(16):
        for j in range(16):
            if line_adjacent(tuple(e[i]), tuple(e[j])):
                assert ec.colors[i] != ec.colors[j]


def test_degree_check():
    with pytest.raises(DegreeTooHigh):
        derand_matching(graph.star_graph(4)[0])


def test_empty_and_single_edge():
    res = derand_matching(np.zeros((0, 2), np.int64))
    assert res.size == 0
    res = derand_matching([[3, 7]])
    assert res.edges.tolist() == [[3, 7]]


def test_sixteen_cycle():
    edges, _ = graph.cycle_graph(16)
    res = derand_matching(edges)
    assert oracle.is_matching(res.edges)
    assert res.size >= 2 == res.target
    assert oracle.max_matching_size(edges) == 8
    assert set(map(tuple, res.edges.tolist())) <= set(map(tuple, edges.tolist()))


@pytest.mark.parametrize("edges", [
    graph.cycle_graph(16)[0], graph.path_graph(25)[0], graph.two_cycles_graph(24)[0],
    graph.union_graph([graph.path_graph(3), graph.cycle_graph(5), graph.path_graph(2)])[0],
])
def test_family_average_by_enumeration(edges):
    m = graph.normalize_edges(edges).shape[0]
    assert m <= 24
    sizes = brute_sizes(edges)
    assert sum(sizes) * 8 >= m * len(sizes)
    full = derand_matching(edges, full_scan=True)
    assert full.sizes_by_seed.tolist() == sizes
    first = next(i for i, s in enumerate(sizes) if s >= math.ceil(m / 8))
    assert derand_matching(edges).seed.index == first


@given(st.integers(0, 10 ** 6))
def test_valid_and_large_enough(seed):
    edges, n = degree2_graph(seed)
    res = derand_matching(edges)
    m = graph.normalize_edges(edges).shape[0]
    assert oracle.is_matching(res.edges)
    assert res.size >= math.ceil(m / 8)


def test_constant_rounds_and_ops_growth():
    rounds, ops = [], []
    for k in range(8, 14):
        edges, n = graph.cycle_graph(1 << k)
        sim = Simulator(MpcConfig(input_words=2 * n))
        derand_matching(edges, sim)
        rounds.append(sim.metrics.rounds)
        ops.append(sim.metrics.total_ops)
    assert max(rounds) <= 20
    assert all(b / a <= 2.5 for a, b in zip(ops, ops[1:])), ops

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mpcconn import graph, oracle


def test_path_example():
    edges, n = graph.generate("path", n=5)
    assert n == 5
    assert edges.tolist() == [[1, 2], [2, 3], [3, 4], [4, 5]]


def test_two_cycles_example():
    edges, n = graph.generate("two_cycles", n=10)
    assert n == 10 and edges.shape[0] == 10
    assert oracle.count_components(edges, n) == 2
    deg = np.bincount(edges.ravel(), minlength=n + 1)[1:]
    assert (deg == 2).all()


def test_gnm_is_deterministic_and_simple():
    a, n = graph.generate("gnm", n=100, m=300, seed=7)
    b, _ = graph.generate("gnm", n=100, m=300, seed=7)
    assert graph.format_edge_list(a, n) == graph.format_edge_list(b, n)
    assert graph.normalize_edges(a).shape[0] == 300
    c, _ = graph.generate("gnm", n=100, m=300, seed=8)
    assert c.tolist() != a.tolist()


def test_generators_shapes():
    assert graph.generate("star", n=9)[0].shape[0] == 8
    assert graph.generate("grid", dims="3x4")[0].shape[0] == 17
    e, n = graph.generate("hypercube", dim=4)
    assert (n, e.shape[0]) == (16, 32)
    e, n = graph.generate("tree", n=50, seed=3)
    assert e.shape[0] == 49 and oracle.count_components(e, n) == 1
    e, n = graph.generate("cycle", n=6, isolated=3)
    assert n == 9 and oracle.count_components(e, n) == 4
    e, n = graph.generate("union", parts="cycle:n=5+path:n=4")
    assert n == 9 and oracle.count_components(e, n) == 2


def test_shuffle_preserves_structure():
    e, n = graph.generate("path", n=40, shuffle=3)
    assert n == 40 and oracle.count_components(e, n) == 1 and oracle.diameter(e, n) == 39


def test_parse_spec():
    assert graph.parse_spec("gnm n=100 m=300 seed=7") == ("gnm", {"n": "100", "m": "300", "seed": "7"})
    with pytest.raises(ValueError):
        graph.parse_spec("gnm n")
    with pytest.raises(ValueError):
        graph.generate("torus", n=3)


def test_edge_list_round_trip_and_normalization():
    text = "# n 6\n# a comment\n1 2\n2 1\n3 3\n\n4 5\n"
    edges, n = graph.parse_edge_list(text)
    assert n == 6
    assert graph.normalize_edges(edges).tolist() == [[1, 2], [4, 5]]
    e2, n2 = graph.parse_edge_list(graph.format_edge_list(edges, n))
    assert n2 == n and e2.tolist() == edges.tolist()
    with pytest.raises(ValueError):
        graph.parse_edge_list("0 1\n")
    with pytest.raises(ValueError):
        graph.parse_edge_list("1 2 3\n")
    with pytest.raises(ValueError):
        graph.parse_edge_list("# n 2\n1 5\n")


def test_dist_graph():
    g = graph.DistGraph.from_edges([[2, 1], [1, 2], [3, 3]], 4)
    assert g.m == 1 and g.edges.tolist() == [[1, 2]]
    assert g.adjacency() == {1: [2], 2: [1]}


def bfs_components(edges, n):
    adj = {v: [] for v in range(1, n + 1)}
    for u, v in np.asarray(edges).reshape(-1, 2).tolist():
        adj[u].append(v)
        adj[v].append(u)
    comp = {}
    for s in range(1, n + 1):
        if s in comp:
            continue
        comp[s] = s
        stack = [s]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in comp:
                    comp[y] = s
                    stack.append(y)
    return [comp[v] for v in range(1, n + 1)]


@given(st.integers(1, 60), st.integers(0, 100), st.integers(0, 1000))
def test_union_find_agrees_with_bfs(n, m, seed):
    m = min(m, n * (n - 1) // 2)
    edges, n = graph.gnm_graph(n, m, seed)
    assert oracle.same_partition(oracle.components(edges, n)[1:], bfs_components(edges, n))


def test_diameter_examples():
    assert oracle.diameter(*graph.cycle_graph(10)) == 5
    assert oracle.diameter(*graph.star_graph(10)) == 2
    assert oracle.diameter(*graph.grid_graph([4, 5])) == 7
    assert oracle.diameter(np.zeros((0, 2), np.int64), 3) == 0


def test_matching_oracles():
    assert oracle.is_matching([[1, 2], [3, 4]])
    assert not oracle.is_matching([[1, 2], [2, 3]])
    assert oracle.max_matching_size(graph.cycle_graph(16)[0]) == 8
    assert oracle.hits_all([[1, 2], [2, 3]], [2])
    assert not oracle.hits_all([[1, 2], [3, 4]], [2])

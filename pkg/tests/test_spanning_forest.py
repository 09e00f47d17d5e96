from collections import defaultdict

import pytest
from hypothesis import given, settings, strategies as st

from clique_mst.clique_sim import Clique
from clique_mst.components import ComponentAssignment
from clique_mst.graph import ComponentGraph, Graph, component_graph, generate_graph, make_edge
from clique_mst.oracle import DisjointSets, connected_components_bfs
from clique_mst.spanning_forest import (
    InvariantViolation,
    WeightClassDecomposition,
    greedy_blocks,
    piece_of,
    spanning_forest,
    weight_class,
    weight_class_decomposition,
)


def check_forest(g, f):
    cc = connected_components_bfs(g)
    assert len(f.edges) == g.n - cc.count
    ds = DisjointSets(g.n)
    for eid in f.edges:
        e = g.edge_map[eid]
        assert ds.union(e.u, e.v), "cycle"
    assert tuple(ds.labels()) == cc.comp
    assert f.comp == cc.comp


def test_weight_class_example():
    sizes = (1, 1, 2, 3, 8)
    gc = ComponentGraph(Graph(5, ()), sizes)
    d = weight_class_decomposition(gc)
    assert d.classes == {1: [0, 1], 2: [2, 3], 4: [4]}
    assert d.x == {1: 2, 2: 5, 4: 8} and d.y == 4
    assert [weight_class(s) for s in (1, 2, 3, 4, 7, 8)] == [1, 2, 2, 3, 3, 4]


def test_single_component_has_no_class_edges():
    gc = ComponentGraph(Graph(1, ()), (9,))
    d = weight_class_decomposition(gc)
    assert list(d.classes) == [4] and d.graphs[4].m == 0


def test_edges_go_to_the_smaller_class():
    # sizes 1 (class 1), 2 (class 2), 8 (class 4)
    base = Graph(3, (make_edge(0, 2, 1, 0), make_edge(1, 2, 1, 1), make_edge(0, 1, 1, 2)))
    d = weight_class_decomposition(ComponentGraph(base, (1, 2, 8)), check=False)
    assert [e.eid for e in d.graphs[1].edges] == [0, 2]
    assert [e.eid for e in d.graphs[2].edges] == [1]


def test_fact_violation_detected():
    # two singletons carry x_1 = 2, so class 1 may hold fewer than 4 edges
    base = Graph(2, tuple(make_edge(0, 1, 1, k) for k in range(4)))
    d = weight_class_decomposition(ComponentGraph(base, (1, 1)), check=False)
    with pytest.raises(InvariantViolation):
        d.check()


def test_greedy_blocks_example():
    assert greedy_blocks([3, 3, 2], 4) == [(0, 3, 0), (0, 1, 1), (1, 2, 1)]
    # slots of the middle member: first piece once, then the second
    assert [piece_of(k, 0, 1, 4) for k in range(3)] == [0, 1, 1]


def test_greedy_blocks_small_component_is_one_piece():
    assert greedy_blocks([1, 0, 2], 4) == [(0, 1, 0), None, (0, 2, 0)]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 12), max_size=10), st.integers(2, 9))
def test_greedy_blocks_pieces_are_full(degrees, unit):
    counts = defaultdict(int)
    for d, blk in zip(degrees, greedy_blocks(degrees, unit)):
        if blk is None:
            assert d == 0
            continue
        first, overlap, last = blk
        for k in range(d):
            p = piece_of(k, first, overlap, unit)
            assert first <= p <= last
            counts[p] += 1
    total = sum(degrees)
    assert sorted(counts) == list(range(-(-total // unit)))
    assert all(c <= unit for c in counts.values())


def test_tree_input_returns_itself():
    g = generate_graph("path", n=30)
    f = spanning_forest(g)
    assert f.edges == [e.eid for e in g.edges]


def test_gnm_128_2048_seed3():
    g = generate_graph("gnm", seed=3, n=128, m=2048)
    check_forest(g, spanning_forest(g))


@pytest.mark.parametrize("n, k, seed", [(64, 4, 0), (200, 10, 1), (512, 8, 2), (512, 40, 3)])
def test_clusters_exercise_every_phase(n, k, seed):
    g = generate_graph("clusters", seed=seed, n=n, k=k)
    net = Clique(n)
    f = spanning_forest(g, net)
    check_forest(g, f)
    assert f.class_sizes, "expected inter-component edges"
    labels = {s.label for s in net.ledger.steps}
    assert {"split:report", "split:pieces", "sparsify:gather"} <= labels
    assert f.reduced_edges <= 4 * n


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 120), st.integers(0, 600), st.integers(0, 10**6), st.sampled_from(["gnm", "blocks", "clusters"]))
def test_forest_property(n, m, seed, kind):
    m = min(m, n * (n - 1) // 2)
    params = {"gnm": {"n": n, "m": m}, "blocks": {"n": n, "m": m, "k": 3}, "clusters": {"n": n, "k": max(1, n // 10)}}[kind]
    g = generate_graph(kind, seed=seed, **params)
    check_forest(g, spanning_forest(g))


def test_direct_rounds_constant():
    rounds = set()
    for n in (1, 5, 64, 256):
        for kind in ("gnm", "clusters"):
            g = generate_graph(kind, seed=n, **({"n": n, "m": min(8 * n, n * (n - 1) // 2)} if kind == "gnm" else {"n": n, "k": 4}))
            net = Clique(max(1, n))
            spanning_forest(g, net)
            rounds.add(net.ledger.direct_rounds)
    assert rounds == {8}


def test_split_traffic_per_vertex():
    g = generate_graph("clusters", seed=5, n=300, k=12)
    net = Clique(g.n)
    f = spanning_forest(g, net)
    steps = {s.label: s for s in net.ledger.steps}
    comp = f.assignment.comp
    classes = defaultdict(set)
    for e in g.edges:
        if comp[e.u] != comp[e.v]:
            c = min(weight_class(f.assignment.sizes[comp[e.u]]), weight_class(f.assignment.sizes[comp[e.v]]))
            classes[e.u].add(c)
            classes[e.v].add(c)
    for x in range(g.n):
        words = steps["split:report"].sent.get(x, 0) + steps["split:pieces"].recv.get(x, 0)
        assert words <= 4 * len(classes[x])


def test_decomposition_checked_on_assignment():
    g = generate_graph("clusters", seed=1, n=200, k=10)
    f = spanning_forest(g)
    gc = component_graph(g, f.assignment)
    d = weight_class_decomposition(gc)
    assert isinstance(d, WeightClassDecomposition) and d == f.decomposition
    assert isinstance(f.assignment, ComponentAssignment)

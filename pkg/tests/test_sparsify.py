import math

import pytest
from hypothesis import given, settings, strategies as st

from clique_mst.clique_sim import Clique
from clique_mst.graph import Graph, generate_graph, make_edge, parse_graph
from clique_mst.oracle import kruskal
from clique_mst.sparsify import (
    InvalidPartition,
    LiftError,
    avg_degree_partition,
    certify_partition,
    consecutive_partition,
    isqrt_ceil,
    iteration_bound,
    lift_edges,
    pair_counts,
    pair_rank,
    split_high_degree,
    sparsify_iterate,
    sparsify_step,
    sparsify_to_sqrt_mn,
)


def msf_keys(g):
    em = g.edge_map
    return sorted(em[e].key for e in kruskal(g))


def test_isqrt_ceil():
    assert [isqrt_ceil(x) for x in (0, 1, 2, 4, 5, 16, 17, 256)] == [0, 1, 2, 2, 3, 4, 5, 16]


def test_pair_rank_is_dense():
    k = 5
    ranks = [pair_rank(i, j, k) for i in range(k) for j in range(i, k)]
    assert ranks == list(range(k * (k + 1) // 2))


def test_certificate_measures_blocks_and_pairs():
    g = parse_graph("8 4\n0 1 1\n0 2 1\n1 3 1\n6 7 1\n")
    p = consecutive_partition(g, 4)
    assert (p.block, p.delta, p.max_block, p.max_pair_edges) == (2, 4, 2, 2)
    assert pair_counts(g, 2) == {(0, 0): 1, (0, 1): 2, (3, 3): 1}
    assert [list(b) for b in p.blocks] == [[0, 1], [2, 3], [4, 5], [6, 7]]


def test_certificate_rejects_dense_pairs():
    edges = [make_edge(u, v, 1, k) for k, (u, v) in enumerate((u, v) for u in range(4) for v in range(4, 8))]
    g = Graph(8, tuple(edges))
    with pytest.raises(InvalidPartition):
        certify_partition(g, 4, c_part=1)


def test_empty_graph_step():
    g = Graph(6, ())
    out = sparsify_step(g, consecutive_partition(g, 3))
    assert out.graph.m == 0 and out.partition.delta == 2


def test_step_rejects_stale_certificate():
    g = generate_graph("gnm", seed=0, n=8, m=10)
    p = consecutive_partition(Graph(8, ()), 4)
    with pytest.raises(InvalidPartition):
        sparsify_step(g, p)


def test_n8_delta4_preserves_msf():
    g = generate_graph("gnm", seed=11, n=8, m=16, wmax=20)
    out = sparsify_step(g, consecutive_partition(g, 4))
    assert kruskal(out.graph) == kruskal(g)
    for (i, j), (gathered, kept) in out.pairs.items():
        span = 4 if i == j else 8
        assert kept <= min(gathered, span - 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 64), st.integers(0, 10**6), st.integers(2, 16))
def test_step_preserves_msf_and_forests(n, seed, delta):
    m = min(n * (n - 1) // 2, 3 * n)
    g = generate_graph("gnm", seed=seed, n=n, m=m, wmax=50)
    p = consecutive_partition(g, delta, c_part=n)
    out = sparsify_step(g, p)
    assert {e.eid for e in out.graph.edges} <= {e.eid for e in g.edges}
    assert kruskal(out.graph) == kruskal(g)
    sb = p.block * isqrt_ceil(p.delta)
    for (i, j) in out.pairs:
        verts = set(range(i * sb, min(n, (i + 1) * sb))) | set(range(j * sb, min(n, (j + 1) * sb)))
        kept = [e for e in out.graph.edges if {e.u // sb, e.v // sb} == {i, j}]
        assert len(kept) <= len(verts) - 1


def test_iterate_example_256():
    n = 256
    g = generate_graph("gnm", seed=3, n=n, m=200)
    p = consecutive_partition(g, 256)
    out, steps = sparsify_iterate(g, p, 2)
    assert steps <= 5 and out.partition.delta <= 2
    assert kruskal(out.graph) == kruskal(g)


def test_iterate_identity():
    g = generate_graph("gnm", seed=3, n=16, m=20)
    p = consecutive_partition(g, 2)
    out, steps = sparsify_iterate(g, p, 4)
    assert steps == 0 and out.graph is g


def test_iteration_bound_values():
    assert [iteration_bound(d) for d in (2, 4, 16, 256, 257)] == [2, 3, 4, 5, 6]


def test_split_degree_nine():
    # 10 vertices, 20 edges: average degree exactly 4; vertex 0 has degree 9
    pairs = [(0, v) for v in range(1, 10)] + [(v, v + 1) for v in range(1, 9)] + [(1, 3), (2, 4), (5, 7)]
    g = Graph(10, tuple(make_edge(u, v, k + 1, k) for k, (u, v) in enumerate(pairs)))
    sg, sm = split_high_degree(g)
    assert sm.count[0] == 3
    assert len(sm.path_edges) == 2
    assert max(sg.degrees) <= 6
    assert sg.n <= 3 * g.n


def test_split_identity_when_degrees_small():
    g = generate_graph("path", n=6)
    sg, sm = split_high_degree(g)
    assert sg == g and sm.path_edges == [] and sm.n_new == 6


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 80), st.integers(1, 600), st.integers(0, 10**6))
def test_split_bounds(n, m, seed):
    m = min(m, n * (n - 1) // 2)
    g = generate_graph("two-scale", seed=seed, n=n, m=m)
    sg, sm = split_high_degree(g)
    unit = max(2, math.ceil(2 * g.m / n))
    assert max(sg.degrees, default=0) <= unit + 2
    assert sg.n <= 3 * n
    own = sm.owner_of()
    for e in sg.edges:
        if e.is_path:
            assert own[e.u] == own[e.v]
        else:
            o = g.edge_map[e.eid]
            assert {own[e.u], own[e.v]} == {o.u, o.v}
    assert sorted(lift_edges(kruskal(sg), sm)) == kruskal(g)


def test_lift_unknown_edge():
    g = generate_graph("path", n=3)
    _, sm = split_high_degree(g)
    with pytest.raises(LiftError):
        lift_edges([99], sm)


def test_avg_degree_partition_empty():
    p = avg_degree_partition(Graph(5, ()))
    assert p.delta == 1 and p.max_pair_edges == 0


def test_avg_degree_partition_degree_bound():
    g = generate_graph("star", n=10)
    with pytest.raises(InvalidPartition):
        avg_degree_partition(g, 2, 3)


@pytest.mark.parametrize("n, m", [(64, 512), (128, 4096), (200, 200), (256, 8192)])
def test_sqrt_mn_pipeline(n, m):
    g = generate_graph("gnm", seed=n + m, n=n, m=m)
    net = Clique(n)
    r = sparsify_to_sqrt_mn(g, net)
    assert r.graph.m <= 1.6 * (math.sqrt(m * n) + n)
    sub = Graph(n, tuple(g.edge_map[e] for e in r.lifted))
    assert kruskal(sub) == kruskal(g)
    assert net.ledger.direct_rounds == 4

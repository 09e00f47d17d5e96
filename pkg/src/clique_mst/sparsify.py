"""Deterministic sparsification that preserves the minimum spanning forest.

Partitions here are always runs of consecutive vertex ids of a fixed block
length, so every processor can compute them locally from the ids alone.
The pipeline :func:`sparsify_to_sqrt_mn` is

1. split every vertex of degree above the (rounded) average degree ``A``
   into pieces joined by light path edges;
2. cut the split graph into blocks of ``ceil(n'/A)`` ids;
3. one sparsification step with the blocks themselves as groups, which
   yields a proper ``A``-partition;
4. one sparsification step grouping ``ceil(sqrt(A))`` blocks, which leaves
   ``O(sqrt(m n))`` edges.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .clique_sim import Clique, CoordinatorJob, assign_coordinators
from .components import HostedGraph, edge_exchange
from .graph import Edge, Graph, SplitMap, path_edge


class InvalidPartition(ValueError):
    pass


class LiftError(KeyError):
    pass


def _cdiv(a: int, b: int) -> int:
    return -(-a // b)


def isqrt_ceil(x: int) -> int:
    return math.isqrt(x - 1) + 1 if x > 0 else 0


@dataclass(frozen=True)
class DeltaPartition:
    """Consecutive-id blocks of length ``block`` with a checked certificate.

    ``max_block`` and ``max_pair_edges`` are measured (B_v, B_e);
    ``vertex_limit`` and ``edge_limit`` are the bounds they were checked
    against.
    """
    n: int
    block: int
    max_block: int
    max_pair_edges: int
    vertex_limit: int
    edge_limit: int

    @property
    def delta(self) -> int:
        return max(1, _cdiv(self.n, self.block))

    def block_of(self, v: int) -> int:
        return v // self.block

    @property
    def blocks(self) -> list[range]:
        return [range(i * self.block, min(self.n, (i + 1) * self.block)) for i in range(self.delta)]


def pair_counts(g: Graph, block: int) -> Counter:
    """Edge count for every block pair ``(i, j)``, ``i <= j``, by full scan."""
    c: Counter = Counter()
    for e in g.edges:
        a, b = e.u // block, e.v // block
        c[(a, b) if a <= b else (b, a)] += 1
    return c


def certify_partition(g: Graph, block: int, c_part: int = 4, edge_limit: int | None = None) -> DeltaPartition:
    """Measure a block partition and check it against its limits.

    Without ``edge_limit`` the pair bound is the Delta-partition bound
    ``c_part * ceil(n / Delta)``, the same as the vertex bound.
    """
    block = max(1, block)
    delta = max(1, _cdiv(g.n, block))
    unit = _cdiv(g.n, delta) if g.n else 0
    vlim = c_part * unit
    elim = vlim if edge_limit is None else edge_limit
    sizes = [len(r) for r in (range(i * block, min(g.n, (i + 1) * block)) for i in range(delta))]
    bv = max(sizes) if g.n else 0
    counts = pair_counts(g, block)
    be = max(counts.values(), default=0)
    if bv > vlim:
        raise InvalidPartition(f"block of {bv} vertices exceeds {vlim}")
    if be > elim:
        worst = max(counts, key=lambda k: (counts[k], k))
        raise InvalidPartition(f"block pair {worst} has {be} edges, limit {elim}")
    return DeltaPartition(g.n, block, bv, be, vlim, elim)


def consecutive_partition(g: Graph, delta: int, c_part: int = 4) -> DeltaPartition:
    """Certified partition into ``delta`` blocks of ``ceil(n / delta)`` ids."""
    return certify_partition(g, _cdiv(g.n, delta) if g.n else 1, c_part)


def pair_rank(i: int, j: int, k: int) -> int:
    """Index of block pair ``i <= j`` among ``k`` blocks, row by row."""
    return i * k - i * (i - 1) // 2 + (j - i)


@dataclass
class SparsifyJob:
    graph: Graph
    partition: DeltaPartition
    holder: dict[int, int]  # eid -> processor holding the edge
    group: Sequence[int]
    grouping: int | None = None  # blocks per superblock; default ceil(sqrt(delta))


@dataclass
class SparsifyOutput:
    graph: Graph
    partition: DeltaPartition
    holder: dict[int, int]
    coordinators: int = 0
    max_gathered: int = 0
    pairs: dict[tuple[int, int], tuple[int, int]] = field(default_factory=dict)  # (i, j) -> (gathered, kept)


def _local_msf(edges: list[Edge]) -> list[Edge]:
    parent: dict[int, int] = {}

    def find(x):
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent[x], parent[x])
            x = parent[x]
        return x

    kept = []
    for e in sorted(edges, key=lambda e: e.key):
        a, b = find(e.u), find(e.v)
        if a != b:
            parent[a] = b
            kept.append(e)
    return kept


def sparsify_step_many(net: Clique, jobs: Sequence[SparsifyJob], c_part: int | None = None) -> list[SparsifyOutput]:
    """One sparsification step on every job, sharing routing invocations.

    Superblocks are runs of ``grouping`` blocks.  Each superblock pair's
    edges go to a coordinator chosen by prefix sums, which keeps only their
    minimum spanning forest.  Kept edges stay with their coordinator.
    """
    c_part = c_part or net.constants.c_part
    plans = []
    for job in jobs:
        g, p = job.graph, job.partition
        counts = pair_counts(g, p.block)
        if p.max_pair_edges != max(counts.values(), default=0) or p.max_pair_edges > p.edge_limit:
            raise InvalidPartition("input partition certificate does not match the graph")
        s = job.grouping or isqrt_ceil(p.delta)
        sb = p.block * s
        k = max(1, _cdiv(g.n, sb))
        plans.append((sb, k))

    def rank_of(j: int, e: Edge) -> int:
        sb, k = plans[j]
        a, b = e.u // sb, e.v // sb
        return pair_rank(min(a, b), max(a, b), k)

    cjobs = []
    for j, job in enumerate(jobs):
        per: Counter = Counter()
        for e in job.graph.edges:
            per[(job.holder[e.eid], rank_of(j, e))] += 1
        sb, k = plans[j]
        cjobs.append(CoordinatorJob(job.group, k * (k + 1) // 2, [(h, r, c) for (h, r), c in sorted(per.items())]))
    coord = assign_coordinators(net, cjobs, "sparsify:assign")

    msgs = []
    for j, job in enumerate(jobs):
        for e in job.graph.edges:
            # one edge descriptor: (job, edge reference)
            msgs.append((job.holder[e.eid], coord[j][rank_of(j, e)], (j, e.eid)))
    inbox = net.route(msgs, "sparsify:gather")

    gathered: dict[tuple[int, int], list[Edge]] = defaultdict(list)
    load: Counter = Counter()
    for p in sorted(inbox):
        for _, (j, eid) in inbox[p]:
            e = jobs[j].graph.edge_map[eid]
            gathered[(j, rank_of(j, e))].append(e)
            load[p] += 1

    outs = []
    for j, job in enumerate(jobs):
        sb, k = plans[j]
        kept: list[Edge] = []
        holder: dict[int, int] = {}
        pairs = {}
        for (jj, r), edges in sorted(gathered.items()):
            if jj != j:
                continue
            forest = _local_msf(edges)
            e0 = edges[0]
            a, b = sorted((e0.u // sb, e0.v // sb))
            pairs[(a, b)] = (len(edges), len(forest))
            for e in forest:
                kept.append(e)
                holder[e.eid] = coord[j][r]
        out_graph = Graph(job.graph.n, tuple(sorted(kept, key=lambda e: e.eid)))
        part = certify_partition(out_graph, sb, c_part)
        used = set(coord[j].values())
        outs.append(
            SparsifyOutput(
                out_graph,
                part,
                holder,
                coordinators=len(used),
                max_gathered=max((load[c] for c in used), default=0),
                pairs=pairs,
            )
        )
    return outs


def _default_holder(g: Graph, net: Clique) -> dict[int, int]:
    return {e.eid: e.u % net.n for e in g.edges}


def sparsify_step(
    g: Graph, p: DeltaPartition, net: Clique | None = None, grouping: int | None = None
) -> SparsifyOutput:
    net = net or Clique(max(1, g.n))
    job = SparsifyJob(g, p, _default_holder(g, net), list(range(net.n)), grouping)
    return sparsify_step_many(net, [job])[0]


def iteration_bound(delta: int) -> int:
    if delta <= 2:
        return 2
    return math.ceil(math.log2(math.log2(delta))) + 2


def sparsify_iterate(
    g: Graph, p: DeltaPartition, target: int, net: Clique | None = None
) -> tuple[SparsifyOutput, int]:
    """Repeat :func:`sparsify_step` until at most ``target`` blocks remain.

    Returns the last output and the number of steps taken.
    """
    net = net or Clique(max(1, g.n))
    target = max(1, target)
    out = SparsifyOutput(g, p, _default_holder(g, net))
    steps = 0
    while out.partition.delta > target:
        job = SparsifyJob(out.graph, out.partition, out.holder, list(range(net.n)))
        out = sparsify_step_many(net, [job])[0]
        steps += 1
    if steps > iteration_bound(p.delta):
        raise AssertionError(f"{steps} iterations exceed bound {iteration_bound(p.delta)}")
    return out, steps


# ------------------------------------------------------------- vertex split

def piece_count(degree: int, unit: int) -> int:
    return max(1, _cdiv(degree, unit))


def unit_degree(n: int, m: int) -> int:
    """Average degree rounded up, at least 2."""
    return max(2, _cdiv(2 * m, n)) if n else 2


@dataclass
class SplitResult:
    graph: Graph
    split_map: SplitMap
    unit: int
    host: list[int]  # processor of each new vertex


def split_hosted(net: Clique, g: Graph) -> SplitResult:
    """Degree splitting with one processor per original vertex."""
    deg = g.degrees
    coordinator = 0
    inbox = net.exchange([(x, coordinator, (deg[x],)) for x in range(g.n)], "split:degrees")
    got = {src if src != coordinator else coordinator: w[0] for src, w in inbox.get(coordinator, ())}
    degs = [got.get(x, 0) for x in range(g.n)]
    m = sum(degs) // 2
    unit = unit_degree(g.n, m)
    counts = [piece_count(d, unit) if d > unit else 1 for d in degs]
    firsts, acc = [], 0
    for c in counts:
        firsts.append(acc)
        acc += c
    net.exchange([(coordinator, x, (firsts[x], counts[x])) for x in range(g.n)], "split:ids")
    net.exchange([(coordinator, x, (acc, unit)) for x in range(g.n)], "split:size")

    def side(x: int, e: Edge) -> int:
        k = slot[(e.eid, x)]
        return firsts[x] + (k // unit if counts[x] > 1 else 0)

    slot: dict[tuple[int, int], int] = {}
    for x in range(g.n):
        for k, e in enumerate(g.adjacency[x]):
            slot[(e.eid, x)] = k
    hosted = HostedGraph(g, list(range(g.n)), list(range(net.n)))
    remote = edge_exchange(net, [hosted], lambda j, e, x: side(x, e), True, "split:endpoints")[0]

    edges = []
    origin: dict[int, int | None] = {}
    for e in g.edges:
        a, b = remote[(e.eid, e.v)], remote[(e.eid, e.u)]
        edges.append(e._replace(u=min(a, b), v=max(a, b)))
        origin[e.eid] = e.eid
    host = []
    for x in range(g.n):
        for k in range(counts[x]):
            host.append(x)
            if k:
                pe = path_edge(firsts[x] + k - 1, firsts[x] + k)
                edges.append(pe)
                origin[pe.eid] = None
    sm = SplitMap(tuple(firsts), tuple(counts), origin)
    return SplitResult(Graph(acc, tuple(edges)), sm, unit, host)


def split_high_degree(g: Graph, net: Clique | None = None) -> tuple[Graph, SplitMap]:
    net = net or Clique(max(1, g.n))
    r = split_hosted(net, g)
    return r.graph, r.split_map


def avg_degree_partition(
    g: Graph, delta: int | None = None, max_degree: int | None = None, c_part: int = 4
) -> DeltaPartition:
    """Blocks of ``ceil(n / delta)`` ids for a graph of bounded degree.

    Each block touches at most ``block * max_degree`` edges, which is the
    pair bound certified here.
    """
    if g.m == 0:
        return certify_partition(g, max(1, g.n), c_part)
    delta = delta or unit_degree(g.n, g.m)
    top = max(g.degrees)
    bound = top if max_degree is None else max_degree
    if top > bound:
        raise InvalidPartition(f"vertex degree {top} exceeds bound {bound}")
    block = _cdiv(g.n, delta)
    return certify_partition(g, block, c_part, edge_limit=block * bound)


def lift_edges(eids: Iterable[int], sm: SplitMap) -> list[int]:
    """Drop path edges, map the rest to original edge ids."""
    out = []
    for eid in eids:
        if eid not in sm.origin:
            raise LiftError(f"edge {eid} is not in the split graph")
        o = sm.origin[eid]
        if o is not None:
            out.append(o)
    return sorted(out)


@dataclass
class SqrtSparsifyResult:
    graph: Graph  # sparsified split graph
    split: SplitResult
    partition: DeltaPartition
    holder: dict[int, int]
    lifted: list[int]  # original edge ids that survive
    steps: list[SparsifyOutput]

    @property
    def split_map(self) -> SplitMap:
        return self.split.split_map


def sparsify_to_sqrt_mn(g: Graph, net: Clique | None = None) -> SqrtSparsifyResult:
    net = net or Clique(max(1, g.n))
    c_part = net.constants.c_part
    split = split_hosted(net, g)
    sg = split.graph
    part = avg_degree_partition(sg, split.unit, split.unit + 2, c_part)
    holder = {}
    for e in sg.edges:
        holder[e.eid] = split.host[e.u] if e.is_path else g.edge_map[e.eid].u
    first = sparsify_step_many(net, [SparsifyJob(sg, part, holder, list(range(net.n)), 1)], c_part)[0]
    second = sparsify_step_many(
        net, [SparsifyJob(first.graph, first.partition, first.holder, list(range(net.n)))], c_part
    )[0]
    lifted = lift_edges((e.eid for e in second.graph.edges), split.split_map)
    return SqrtSparsifyResult(second.graph, split, second.partition, second.holder, lifted, [first, second])

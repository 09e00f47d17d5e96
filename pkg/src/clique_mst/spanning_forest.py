"""Deterministic spanning forest built on component reduction.

Pipeline per instance:

1. Component reduction gives components in which every vertex of degree
   ``d`` lives in a component of at least ``d + 1`` vertices.
2. Component-vertices are bucketed by size class ``j`` (sizes in
   ``[2**(j-1), 2**j)``); every inter-component edge goes to the class
   graph ``G_i`` of the smaller class of its endpoints.
3. Each ``G_i`` is degree-split at the component level, partitioned and
   sparsified twice, all classes and instances in parallel.
4. Surviving edges plus the marked edges meet at the instance coordinator,
   which builds the forest.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .clique_sim import AccountingError, Clique
from .components import ComponentAssignment, HostedGraph, edge_exchange, reduce_components_many
from .graph import ComponentGraph, Edge, Graph, component_graph, path_edge
from .oracle import DisjointSets
from .sparsify import SparsifyJob, avg_degree_partition, piece_count, sparsify_step_many, unit_degree


class InvariantViolation(AssertionError):
    pass


def weight_class(size: int) -> int:
    return size.bit_length()


@dataclass(frozen=True)
class WeightClassDecomposition:
    classes: dict[int, list[int]]
    x: dict[int, int]
    y: int
    graphs: dict[int, Graph]  # over component-vertex ids

    def vertex_count(self, i: int) -> int:
        g = self.graphs[i]
        touched = {v for e in g.edges for v in (e.u, e.v)}
        return len(touched | set(self.classes.get(i, ())))

    def vertex_bound(self, i: int) -> Fraction:
        return sum((Fraction(xj, 2 ** (j - 1)) for j, xj in self.x.items() if j >= i), Fraction(0))

    def check(self):
        """Edge bound ``|E(G_i)| < x_i 2^i`` and vertex bound, for every class graph."""
        for i, g in self.graphs.items():
            if g.m >= self.x.get(i, 0) * 2**i:
                raise InvariantViolation(f"class graph {i}: {g.m} edges, bound {self.x.get(i, 0) * 2**i}")
            if self.vertex_count(i) > self.vertex_bound(i):
                raise InvariantViolation(f"class graph {i}: {self.vertex_count(i)} vertices, bound {self.vertex_bound(i)}")


def weight_class_decomposition(gc: ComponentGraph, check: bool = True) -> WeightClassDecomposition:
    cls = [weight_class(w) for w in gc.weight]
    classes: dict[int, list[int]] = defaultdict(list)
    x: Counter = Counter()
    for v, c in enumerate(cls):
        classes[c].append(v)
        x[c] += gc.weight[v]
    buckets: dict[int, list[Edge]] = defaultdict(list)
    for e in gc.base.edges:
        buckets[min(cls[e.u], cls[e.v])].append(e)
    graphs = {i: Graph(gc.base.n, tuple(buckets.get(i, ()))) for i in sorted(classes)}
    d = WeightClassDecomposition(dict(classes), dict(x), max(classes, default=0), graphs)
    if check:
        d.check()
    return d


def greedy_blocks(degrees: Sequence[int], unit: int) -> list[tuple[int, int, int] | None]:
    """Cut the concatenated member blocks into pieces of length ``unit``.

    Returns ``(first_piece, overlap_with_first, last_piece)`` per member, or
    ``None`` for a member of degree 0.  A total length of at most ``unit``
    gives a single piece.
    """
    out: list[tuple[int, int, int] | None] = []
    off = 0
    for d in degrees:
        if d == 0:
            out.append(None)
            continue
        first = off // unit
        last = (off + d - 1) // unit
        out.append((first, min(d, (first + 1) * unit - off), last))
        off += d
    return out


def piece_of(slot: int, first: int, overlap: int, unit: int) -> int:
    return first if slot < overlap else first + 1 + (slot - overlap) // unit


@dataclass
class ForestResult:
    edges: list[int]
    comp: tuple[int, ...]
    assignment: ComponentAssignment
    decomposition: WeightClassDecomposition
    reduced_edges: int  # inter-component edges surviving sparsification
    class_sizes: dict[int, tuple[int, int]]  # class -> (|E(G_i)|, |E(G_i^R)|)


@dataclass
class _ClassSplit:
    inst: int
    cls: int
    graph: Graph
    unit: int
    holder: dict[int, int]
    group: Sequence[int]


def component_split_many(net: Clique, insts, assigns, nbr_comp, nbr_cls, my_cls, direct: bool = False) -> list[_ClassSplit]:
    """Degree-split every class graph of every instance at the component level.

    Each vertex reports ``(class, class-degree, component)`` to the class
    coordinator and gets back two words: ``(first piece, overlap, last
    piece)`` and ``(piece count, unit)``.  Edge endpoints then trade piece ids.
    """
    reports = []
    slots: list[dict[int, dict[int, list[Edge]]]] = []  # inst -> vertex -> class -> edges
    split_coord = {}
    for j, inst in enumerate(insts):
        g = inst.graph
        comp = assigns[j].comp
        per_vertex: dict[int, dict[int, list[Edge]]] = defaultdict(lambda: defaultdict(list))
        for x in range(g.n):
            for e in g.adjacency[x]:
                if nbr_comp[j][(e.eid, x)] != comp[x]:
                    c = min(my_cls[j][x], nbr_cls[j][(e.eid, x)])
                    per_vertex[x][c].append(e)
        slots.append(per_vertex)
        for x in sorted(per_vertex):
            for c, edges in sorted(per_vertex[x].items()):
                coord = inst.group[(c - 1) % len(inst.group)]
                split_coord[(j, c)] = coord
                reports.append((inst.host[x], coord, (c, len(edges), comp[x]), j, x))
    inbox = net.route([(s, d, w) for s, d, w, _, _ in reports], "split:report")
    del inbox  # contents mirrored by `reports`

    # coordinator side
    info: dict[tuple[int, int], dict] = {}
    by_class: dict[tuple[int, int], list[tuple[int, int, int]]] = defaultdict(list)
    for _, _, (c, d, comp_id), j, x in reports:
        by_class[(j, c)].append((comp_id, x, d))
    replies = []
    splits = []
    for (j, c), rows in sorted(by_class.items()):
        rows.sort()
        comp_deg: Counter = Counter()
        for comp_id, _, d in rows:
            comp_deg[comp_id] += d
        n_vertices = len(comp_deg)
        m_edges = sum(comp_deg.values()) // 2
        unit = unit_degree(n_vertices, m_edges)
        base = {}
        acc = 0
        path = []
        for comp_id in sorted(comp_deg):
            base[comp_id] = acc
            k = piece_count(comp_deg[comp_id], unit)
            path += [path_edge(acc + t, acc + t + 1) for t in range(k - 1)]
            acc += k
        members: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for comp_id, x, d in rows:
            members[comp_id].append((x, d))
        coord = split_coord[(j, c)]
        for comp_id, mem in members.items():
            for (x, _), blk in zip(mem, greedy_blocks([d for _, d in mem], unit)):
                first, overlap, last = blk
                info[(j, c, x)] = (base[comp_id] + first, overlap, unit)
                host = insts[j].host[x]
                replies.append((coord, host, (base[comp_id] + first, overlap, base[comp_id] + last)))
                replies.append((coord, host, (acc, unit)))
        splits.append((j, c, acc, unit, path, coord))
    net.route(replies, "split:pieces")

    def side(j: int, e: Edge, x: int):
        comp = assigns[j].comp
        if nbr_comp[j][(e.eid, x)] == comp[x]:
            return None
        c = min(my_cls[j][x], nbr_cls[j][(e.eid, x)])
        first, overlap, unit = info[(j, c, x)]
        return piece_of(slot_index[(j, e.eid, x)], first, overlap, unit)

    slot_index = {}
    for j, per_vertex in enumerate(slots):
        for x, classes in per_vertex.items():
            for c, edges in classes.items():
                for k, e in enumerate(edges):
                    slot_index[(j, e.eid, x)] = k
    remote = edge_exchange(net, insts, side, direct, "split:endpoints")

    out = []
    for j, c, n_pieces, unit, path, coord in splits:
        inst = insts[j]
        edges = []
        holder = {}
        for x, classes in slots[j].items():
            for e in classes.get(c, ()):
                if x != e.u:
                    continue
                a, b = remote[j][(e.eid, e.v)], remote[j][(e.eid, e.u)]
                edges.append(e._replace(u=min(a, b), v=max(a, b)))
                holder[e.eid] = inst.host[e.u]
        for pe in path:
            edges.append(pe)
            holder[pe.eid] = coord
        out.append(_ClassSplit(j, c, Graph(n_pieces, tuple(edges)), unit, holder, inst.group))
    return out


def spanning_forest_many(net: Clique, insts: Sequence[HostedGraph], direct: bool = False) -> list[ForestResult]:
    """Spanning forests of all instances, run side by side on one clique."""
    assigns = reduce_components_many(net, insts, direct)
    comps = [a.comp for a in assigns]
    sizes = [a.sizes for a in assigns]
    my_cls = [[weight_class(sizes[j][c]) for c in comps[j]] for j in range(len(insts))]

    nbr_comp = edge_exchange(net, insts, lambda j, e, x: comps[j][x], direct, "forest:component")
    nbr_cls = edge_exchange(
        net,
        insts,
        lambda j, e, x: my_cls[j][x] if comps[j][e.u] != comps[j][e.v] else None,
        direct,
        "forest:class",
    )
    decomps = []
    for j, inst in enumerate(insts):
        d = weight_class_decomposition(component_graph(inst.graph, assigns[j]))
        if len(d.classes) > max(1, inst.graph.n).bit_length():
            raise InvariantViolation("more size classes than log2(n) + 1")
        decomps.append(d)

    splits = component_split_many(net, insts, assigns, nbr_comp, nbr_cls, my_cls, direct)

    c_part = net.constants.c_part
    jobs = []
    for s in splits:
        part = avg_degree_partition(s.graph, s.unit, s.unit + 2, c_part)
        jobs.append(SparsifyJob(s.graph, part, s.holder, s.group, 1))
    first = sparsify_step_many(net, jobs)
    second = sparsify_step_many(
        net, [SparsifyJob(o.graph, o.partition, o.holder, s.group) for o, s in zip(first, splits)]
    )

    msgs = []
    reduced = Counter()
    class_sizes: list[dict[int, tuple[int, int]]] = [dict() for _ in insts]
    for s, out in zip(splits, second):
        kept = [e for e in out.graph.edges if not e.is_path]
        reduced[s.inst] += len(kept)
        class_sizes[s.inst][s.cls] = (decomps[s.inst].graphs[s.cls].m, len(kept))
        inst = insts[s.inst]
        for e in kept:
            o = inst.graph.edge_map[e.eid]
            msgs.append((out.holder[e.eid], inst.coordinator, (o.u, o.v, o.eid)))
    for j, inst in enumerate(insts):
        limit = net.constants.c_gather * max(1, inst.graph.n)
        if reduced[j] > limit:
            raise AccountingError(f"instance {j}: {reduced[j]} reduced edges exceed c_gather*n = {limit}")
    inbox = net.route(msgs, "forest:gather")

    results = []
    for j, inst in enumerate(insts):
        g = inst.graph
        got = {eid for _, (_, _, eid) in inbox.get(inst.coordinator, ())}
        got.update(assigns[j].witness)
        ds = DisjointSets(g.n)
        forest = []
        for e in sorted((g.edge_map[i] for i in got), key=lambda e: e.key):
            if ds.union(e.u, e.v):
                forest.append(e.eid)
        results.append(
            ForestResult(sorted(forest), tuple(ds.labels()), assigns[j], decomps[j], reduced[j], class_sizes[j])
        )
    return results


def spanning_forest(g: Graph, net: Clique | None = None) -> ForestResult:
    net = net or Clique(max(1, g.n))
    inst = HostedGraph(g, list(range(g.n)), list(range(net.n)))
    return spanning_forest_many(net, [inst], direct=True)[0]

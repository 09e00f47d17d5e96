"""Deterministic constant-round MST on the congested clique.

Pipeline:

1. Sparsify to O(sqrt(mn) + n) edges, lifted back to original edges.
2. Sort the survivors by key and cut them into batches of ``n``.
3. For batch ``b`` an instance computes connected components of the union
   of all lighter batches; every instance runs on its own processor group.
4. The home of each batch keeps the edges that join distinct components
   of its prefix.  Those edges are exactly the MST edges of the batch.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .clique_sim import AccountingError, Clique, SimulationError
from .components import HostedGraph
from .graph import Edge, Graph
from .oracle import DisjointSets
from .spanning_forest import ForestResult, spanning_forest_many
from .sparsify import sparsify_to_sqrt_mn


@dataclass(frozen=True)
class EdgeBatch:
    index: int
    edges: tuple[Edge, ...]  # sorted by key


@dataclass
class CcInstance:
    index: int  # covers batches 0 .. index-1
    group: list[int]
    edges: list[Edge] = field(default_factory=list)
    result: ForestResult | None = None


@dataclass(frozen=True)
class VertexPartition:
    owner: dict[int, int]  # vertex -> processor holding all its copies
    peer_owner: dict[tuple[int, int], int]  # (eid, vertex) -> owner of the other endpoint
    held: dict[int, list[tuple[int, int, int]]]  # processor -> (source, eid, target)


@dataclass
class MstResult:
    edges: list[int]
    weight: int | float
    sparsified: int
    batches: int
    instances: int
    volume: int  # edges over all instances
    net: Clique


def make_batches(edges: Sequence[Edge], n: int) -> list[EdgeBatch]:
    ordered = sorted(edges, key=lambda e: e.key)
    return [EdgeBatch(b, tuple(ordered[s : s + n])) for b, s in enumerate(range(0, len(ordered), n))]


def instance_groups(t: int, n: int) -> list[list[int]]:
    """Disjoint groups: instance ``i`` gets ``i`` consecutive processors (instance 0 none)."""
    need = t * (t - 1) // 2
    if need > n:
        raise AccountingError(f"{t} batches need {need} instance processors, only {n} exist")
    groups, start = [], 0
    for i in range(t):
        groups.append(list(range(start, start + i)))
        start += i
    return groups


def duplicate_batches(
    net: Clique, batches: Sequence[EdgeBatch], homes: Sequence[int], helpers: Sequence[Sequence[int]]
) -> list[dict[int, list[Edge]]]:
    """Copy batch ``b`` from ``homes[b]`` to every processor in ``helpers[b]``.

    Stage 1: the home sends each helper one contiguous slice.  Stage 2: each
    helper sends its slice to the other helpers.  Returns, per batch,
    ``helper -> full copy`` in batch order.
    """
    stage1, stage2 = [], []
    slices: list[list[list[Edge]]] = []
    for b, batch in enumerate(batches):
        hs = list(helpers[b])
        k = len(hs)
        if k == 0:
            slices.append([])
            continue
        q = -(-len(batch.edges) // k)
        parts = [list(batch.edges[s * q : (s + 1) * q]) for s in range(k)]
        slices.append(parts)
        for h, part in zip(hs, parts):
            stage1 += [(homes[b], h, (e.u, e.v, e.eid)) for e in part]
            stage2 += [(h, other, (e.u, e.v, e.eid)) for other in hs if other != h for e in part]
    net.route(stage1, "dup:slices")
    net.route(stage2, "dup:spread")
    out = []
    for b, parts in enumerate(slices):
        full = [e for part in parts for e in part]
        out.append({h: list(full) for h in helpers[b]})
    return out


def vertex_partition_setup(
    net: Clique, jobs: Sequence[tuple[Sequence[int], dict[int, list[Edge]]]]
) -> list[VertexPartition]:
    """Give every vertex of every instance a single owning processor.

    Each edge is copied once per endpoint and the copies sorted by source;
    a vertex split across two processors is handed to the higher one.  A
    second sort by edge id pairs the two copies of each edge, and the
    holder of the pair tells both owners who owns the other side.  The
    boundary exchange is a direct round and runs even with no jobs.
    """
    sort_jobs = []
    for group, holdings in jobs:
        recs: dict[int, list] = defaultdict(list)
        for p, edges in holdings.items():
            for e in edges:
                recs[p].append(((e.u, e.eid), (e.u, e.eid, e.v)))
                recs[p].append(((e.v, e.eid), (e.v, e.eid, e.u)))
        sort_jobs.append((list(group), dict(recs)))
    sorted1 = net.sort_many(sort_jobs, "vps:by-source")

    # each processor tells its predecessor the first source it holds
    boundary = []
    firsts: list[dict[int, int]] = []
    for (group, _), (held, _) in zip(sort_jobs, sorted1):
        f = {p: held[p][0][1][0] for p in group if held.get(p)}
        firsts.append(f)
        for a, b in zip(group, group[1:]):
            if b in f:
                boundary.append((b, a, (f[b],)))
    net.exchange(boundary, "vps:boundary")

    forward = []
    holds: list[dict[int, list[tuple[int, int, int]]]] = []
    for (group, _), (held, _), f in zip(sort_jobs, sorted1, firsts):
        mine: dict[int, list] = {p: [rec for _, rec in held.get(p, ())] for p in group}
        incoming: dict[int, int] = {}
        for a, b in zip(group, group[1:]):
            nxt = f.get(b)
            if nxt is None or not mine[a] or mine[a][-1][0] != nxt:
                continue
            if incoming.get(a) == nxt:
                # forwarding would take two hops: degree exceeds the chunk length
                raise SimulationError(f"vertex {nxt} spans more than two processors")
            moving = [r for r in mine[a] if r[0] == nxt]
            incoming[b] = nxt
            mine[a] = [r for r in mine[a] if r[0] != nxt]
            mine[b] = moving + mine[b]
            forward += [(a, b, r) for r in moving]
        holds.append(mine)
    net.route(forward, "vps:forward")

    owners = []
    pair_jobs = []
    for (group, _), mine in zip(sort_jobs, holds):
        owner = {}
        for p in group:
            for src, _, _ in mine[p]:
                if owner.setdefault(src, p) != p:
                    raise SimulationError(f"vertex {src} owned twice")
        owners.append(owner)
        pair_jobs.append(
            (list(group), {p: [((eid, int(src > dst)), (src, p)) for src, eid, dst in mine[p]] for p in group if mine[p]})
        )
    sorted2 = net.sort_many(pair_jobs, "vps:by-edge", align=2)

    notify = []
    peer: list[dict[tuple[int, int], int]] = [dict() for _ in jobs]
    for j, (held, _) in enumerate(sorted2):
        for p in sorted(held):
            recs = held[p]
            if len(recs) % 2:
                raise SimulationError(f"processor {p} holds an unpaired edge copy")
            for (k0, (a, pa)), (k1, (b, pb)) in zip(recs[::2], recs[1::2]):
                if k0[0] != k1[0]:
                    raise SimulationError(f"processor {p} holds an unpaired edge copy")
                eid = k0[0]
                notify.append((p, pa, (eid, a, pb)))
                notify.append((p, pb, (eid, b, pa)))
                peer[j][(eid, a)] = pb
                peer[j][(eid, b)] = pa
    net.route(notify, "vps:notify")
    return [VertexPartition(o, pj, h) for o, pj, h in zip(owners, peer, holds)]


def kruskal_filter(batch: EdgeBatch, comp: Sequence[int] | None, n: int) -> list[int]:
    """Edges of the batch that join distinct prefix components, scanned in key order."""
    ds = DisjointSets(n)
    if comp is not None:
        first: dict[int, int] = {}
        for x, c in enumerate(comp):
            ds.union(first.setdefault(c, x), x)
    return [e.eid for e in batch.edges if ds.union(e.u, e.v)]


def mst(g: Graph, net: Clique | None = None) -> MstResult:
    """Minimum spanning forest of ``g`` as sorted original edge ids."""
    net = net or Clique(max(1, g.n))
    n = net.n
    if n < g.n:
        raise ValueError("the clique needs one processor per vertex")

    sp = sparsify_to_sqrt_mn(g, net)
    holdings: dict[int, list] = defaultdict(list)
    for eid in sp.lifted:
        e = g.edge_map[eid]
        holdings[sp.holder[eid]].append((e.key, eid))
    held, start = net.sort(dict(holdings), label="mst:sort")
    msgs = []
    for p in sorted(held):
        for r, (_, eid) in enumerate(held[p], start[p]):
            msgs.append((p, r // n, (eid,)))
    net.route(msgs, "mst:batches")

    batches = make_batches([g.edge_map[eid] for eid in sp.lifted], n)
    t = len(batches)
    homes = list(range(t))
    groups = instance_groups(t, n)
    # helper of batch b inside instance i > b is group i's b-th processor
    helpers = [[groups[i][b] for i in range(b + 1, t)] for b in range(t)]
    copies = duplicate_batches(net, batches, homes, helpers)

    instances = [CcInstance(i, groups[i]) for i in range(1, t)]
    jobs = []
    for inst in instances:
        hold = {groups[inst.index][b]: copies[b][groups[inst.index][b]] for b in range(inst.index)}
        inst.edges = [e for b in range(inst.index) for e in batches[b].edges]
        jobs.append((inst.group, hold))
    parts = vertex_partition_setup(net, jobs)

    hosted = []
    for inst, vp in zip(instances, parts):
        host = [vp.owner.get(x, inst.group[x % len(inst.group)]) for x in range(g.n)]
        hosted.append(HostedGraph(Graph(g.n, tuple(inst.edges)), host, inst.group))
    results = spanning_forest_many(net, hosted)
    for inst, res in zip(instances, results):
        inst.result = res
    net.route(
        [(inst.group[0], homes[inst.index], (x, c)) for inst in instances for x, c in enumerate(inst.result.comp)],
        "mst:labels",
    )

    chosen = []
    for b, batch in enumerate(batches):
        comp = instances[b - 1].result.comp if b else None
        chosen += [(homes[b], eid) for eid in kruskal_filter(batch, comp, g.n)]
    net.route([(p, 0, (eid,)) for p, eid in chosen], "mst:collect")

    edges = sorted(eid for _, eid in chosen)
    return MstResult(
        edges,
        g.total_weight(edges),
        len(sp.lifted),
        t,
        len(instances),
        sum(len(i.edges) for i in instances),
        net,
    )

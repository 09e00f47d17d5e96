"""Component reduction: two marking stages followed by one gather.

After it runs, a vertex of degree ``d`` sits in a component of at least
``d + 1`` vertices.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .clique_sim import Clique
from .graph import Edge, Graph
from .oracle import DisjointSets


@dataclass(frozen=True)
class ComponentAssignment:
    comp: tuple[int, ...]
    witness: tuple[int, ...]
    sizes: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.sizes)

    def members(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.sizes]
        for v, c in enumerate(self.comp):
            out[c].append(v)
        return out


@dataclass
class HostedGraph:
    """A graph simulated on the clique.

    ``host[v]`` is the processor holding vertex ``v`` and all its incident
    edges; ``group`` is the processor set reserved for this instance and
    ``group[0]`` its coordinator.  Instances running side by side must have
    distinct coordinators.
    """
    graph: Graph
    host: Sequence[int]
    group: Sequence[int]

    @property
    def coordinator(self) -> int:
        return self.group[0]


def edge_exchange(
    net: Clique,
    insts: Sequence[HostedGraph],
    payload: Callable[[int, Edge, int], int | None],
    direct: bool,
    label: str,
) -> list[dict[tuple[int, int], int]]:
    """Each endpoint ``x`` of every edge tells the other endpoint ``payload(j, e, x)``.

    Returns, per instance, ``(eid, receiving_vertex) -> value``.  Endpoints on
    the same processor exchange locally.  ``None`` payloads are not sent.
    """
    got: list[dict[tuple[int, int], int]] = [dict() for _ in insts]
    msgs = []
    for j, inst in enumerate(insts):
        host = inst.host
        for e in inst.graph.edges:
            for x, y in ((e.u, e.v), (e.v, e.u)):
                val = payload(j, e, x)
                if val is None:
                    continue
                if host[x] == host[y]:
                    got[j][(e.eid, y)] = val
                else:
                    msgs.append((host[x], host[y], (j, e.eid, val)))
    inbox = (net.exchange if direct else net.route)(msgs, label)
    for p in sorted(inbox):
        for _, (j, eid, val) in inbox[p]:
            e = insts[j].graph.edge_map[eid]
            y = e.u if insts[j].host[e.u] == p else e.v
            got[j][(eid, y)] = val
    return got


def reduce_components_many(
    net: Clique, insts: Sequence[HostedGraph], direct: bool = False
) -> list[ComponentAssignment]:
    """Run component reduction on every instance simultaneously.

    With ``direct`` the instance must be hosted one vertex per processor on
    a simple graph, and neighbour traffic uses direct rounds.
    """
    coords = [inst.coordinator for inst in insts]
    if len(set(coords)) != len(coords):
        raise ValueError("parallel instances need distinct coordinators")
    degs = [inst.graph.degrees for inst in insts]

    nbr_deg = edge_exchange(net, insts, lambda j, e, x: degs[j][x], direct, "reduce:degree")

    # stage 1: mark the edge to the neighbour with the largest (degree, id)
    mark1: list[dict[int, int]] = []
    for j, inst in enumerate(insts):
        adj = inst.graph.adjacency
        m1 = {}
        for x in range(inst.graph.n):
            if adj[x]:
                best = max(adj[x], key=lambda e: (nbr_deg[j][(e.eid, x)], e.other(x)))
                m1[x] = best.eid
        mark1.append(m1)

    marked_by_other = edge_exchange(
        net, insts, lambda j, e, x: int(mark1[j].get(x) == e.eid), direct, "reduce:notify"
    )

    # stage 2: among edges neither side marked, take the largest (degree, id) neighbour
    mark2: list[dict[int, int]] = []
    for j, inst in enumerate(insts):
        adj = inst.graph.adjacency
        m2 = {}
        for x in range(inst.graph.n):
            cands = [e for e in adj[x] if e.eid != mark1[j].get(x) and not marked_by_other[j][(e.eid, x)]]
            if cands:
                best = max(cands, key=lambda e: (nbr_deg[j][(e.eid, x)], e.other(x)))
                m2[x] = best.eid
        mark2.append(m2)

    # gather marked edges at the coordinator; a stage-1 edge marked from both
    # sides is sent by the smaller endpoint only
    first, second = [], []
    for j, inst in enumerate(insts):
        em = inst.graph.edge_map
        for x, eid in sorted(mark1[j].items()):
            e = em[eid]
            y = e.other(x)
            if marked_by_other[j][(eid, x)] and y < x:
                continue
            first.append((inst.host[x], coords[j], (e.u, e.v, eid)))
        for x, eid in sorted(mark2[j].items()):
            e = em[eid]
            second.append((inst.host[x], coords[j], (e.u, e.v, eid)))
    if direct:
        inboxes = [net.exchange(first, "reduce:gather1"), net.exchange(second, "reduce:gather2")]
    else:
        inboxes = [net.route(first + second, "reduce:gather")]
    witness_at: dict[int, set[int]] = defaultdict(set)
    for inbox in inboxes:
        for p, items in inbox.items():
            for _, (_, _, eid) in items:
                witness_at[p].add(eid)

    results = []
    replies = []
    for j, inst in enumerate(insts):
        g = inst.graph
        ds = DisjointSets(g.n)
        witness = sorted(witness_at[coords[j]])
        for eid in witness:
            e = g.edge_map[eid]
            ds.union(e.u, e.v)
        comp = ds.labels()
        sizes = [0] * (max(comp) + 1 if comp else 0)
        for c in comp:
            sizes[c] += 1
        for x in range(g.n):
            if g.adjacency[x]:
                replies.append((coords[j], inst.host[x], (x, comp[x], sizes[comp[x]])))
        results.append(ComponentAssignment(tuple(comp), tuple(witness), tuple(sizes)))
    (net.exchange if direct else net.route)(replies, "reduce:labels")
    return results


def reduce_components(g: Graph, net: Clique | None = None) -> ComponentAssignment:
    net = net or Clique(max(1, g.n))
    inst = HostedGraph(g, list(range(g.n)), list(range(net.n)))
    return reduce_components_many(net, [inst], direct=True)[0]

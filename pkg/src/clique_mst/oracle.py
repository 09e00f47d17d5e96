"""Sequential reference implementations used as test oracles.

Nothing here touches the simulator, so oracle and system under test do
not share failure modes (apart from :class:`DisjointSets`, which the final
coordinators reuse as a local primitive).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .graph import Graph


class DisjointSets:
    """Union by rank with path halving."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.count = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; False if they were already one set."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.count -= 1
        return True

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    def labels(self) -> list[int]:
        """Dense labels, numbered by smallest member."""
        out, ids = [], {}
        for x in range(len(self.parent)):
            r = self.find(x)
            if r not in ids:
                ids[r] = len(ids)
            out.append(ids[r])
        return out


def kruskal(g: Graph) -> list[int]:
    """Unique minimum spanning forest, as a sorted list of edge ids."""
    ds = DisjointSets(g.n)
    return sorted(e.eid for e in g.sorted_edges() if ds.union(e.u, e.v))


@dataclass(frozen=True)
class Components:
    comp: tuple[int, ...]
    sizes: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.sizes)


def connected_components_bfs(g: Graph) -> Components:
    comp = [-1] * g.n
    sizes = []
    adj = g.adjacency
    for s in range(g.n):
        if comp[s] != -1:
            continue
        c = len(sizes)
        comp[s] = c
        q = deque([s])
        size = 0
        while q:
            x = q.popleft()
            size += 1
            for e in adj[x]:
                y = e.other(x)
                if comp[y] == -1:
                    comp[y] = c
                    q.append(y)
        sizes.append(size)
    return Components(tuple(comp), tuple(sizes))


def boruvka_rounds(g: Graph) -> tuple[list[int], int]:
    """Classic Boruvka; returns the forest and the number of phases that added edges."""
    ds = DisjointSets(g.n)
    chosen: set[int] = set()
    rounds = 0
    while True:
        best: dict[int, object] = {}
        for e in g.edges:
            a, b = ds.find(e.u), ds.find(e.v)
            if a == b:
                continue
            for r in (a, b):
                if r not in best or e.key < best[r].key:
                    best[r] = e
        if not best:
            break
        rounds += 1
        for e in best.values():
            if ds.union(e.u, e.v):
                chosen.add(e.eid)
    return sorted(chosen), rounds


def boruvka_bound(n: int) -> int:
    return math.ceil(math.log2(n)) if n > 1 else 0

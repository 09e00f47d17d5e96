"""Weighted undirected graphs with a strict total order on edges.

Every edge carries a :class:`WeightKey` ``(cls, w, eid)``.  Keys compare
lexicographically, so no two edges of a graph are ever equal and the
minimum spanning forest is unique.  Synthetic path edges created by vertex
splitting use ``cls = 0`` and a negative ``eid``; input edges use
``cls = 1`` and ``eid >= 0``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

PATH_CLASS = 0
ORIGINAL_CLASS = 1


class GraphError(ValueError):
    pass


class GraphParseError(GraphError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class WeightKey(NamedTuple):
    cls: int
    w: int | float
    eid: int


class Edge(NamedTuple):
    u: int
    v: int
    key: WeightKey
    eid: int  # mirrors key.eid; stored for speed

    @property
    def w(self) -> int | float:
        return self.key.w

    @property
    def is_path(self) -> bool:
        return self.key.cls == PATH_CLASS

    def other(self, x: int) -> int:
        return self.v if x == self.u else self.u


def make_edge(u: int, v: int, w: int | float, eid: int, cls: int = ORIGINAL_CLASS) -> Edge:
    if u == v:
        raise GraphError(f"self-loop at vertex {u}")
    if u > v:
        u, v = v, u
    return Edge(u, v, WeightKey(cls, w, eid), eid)


def path_edge(a: int, b: int) -> Edge:
    """Synthetic edge lighter than every input edge; id derived from ``min(a, b)``."""
    lo = min(a, b)
    return make_edge(a, b, 0, -(lo + 1), PATH_CLASS)


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.n < 0:
            raise GraphError("negative vertex count")
        seen = set()
        for e in self.edges:
            if not (0 <= e.u < e.v < self.n):
                raise GraphError(f"edge {e.eid} has bad endpoints ({e.u}, {e.v}) for n={self.n}")
            if e.eid in seen:
                raise GraphError(f"duplicate edge id {e.eid}")
            seen.add(e.eid)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> Graph:
        return cls(n, tuple(edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def avg_degree(self) -> float:
        return 2 * self.m / self.n if self.n else 0.0

    @cached_property
    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1
        return deg

    @cached_property
    def adjacency(self) -> list[list[Edge]]:
        """Incident edges per vertex, in edge-id order."""
        adj: list[list[Edge]] = [[] for _ in range(self.n)]
        for e in sorted(self.edges, key=lambda e: e.eid):
            adj[e.u].append(e)
            adj[e.v].append(e)
        return adj

    @cached_property
    def edge_map(self) -> dict[int, Edge]:
        return {e.eid: e for e in self.edges}

    def total_weight(self, eids: Iterable[int]) -> int | float:
        em = self.edge_map
        return sum(em[i].w for i in eids)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges, key=lambda e: e.key)


def _parse_weight(tok: str, lineno: int) -> int | float:
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        w = float(tok)
    except ValueError:
        raise GraphParseError(lineno, f"bad weight {tok!r}") from None
    if math.isnan(w) or math.isinf(w):
        raise GraphParseError(lineno, f"non-finite weight {tok!r}")
    return w


def parse_graph(text: str) -> Graph:
    """Parse the ``n m`` / ``u v w`` edge-list format.

    The edge on the k-th edge line (0-based) gets ``eid = k``.
    """
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, toks) for i, toks in lines if toks]
    if not lines:
        raise GraphParseError(1, "empty document")
    lineno, head = lines[0]
    if len(head) != 2:
        raise GraphParseError(lineno, "header must be 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise GraphParseError(lineno, "header must be two integers") from None
    if n < 0 or m < 0:
        raise GraphParseError(lineno, "negative size in header")
    body = lines[1:]
    if len(body) != m:
        where = body[m][0] if len(body) > m else (body[-1][0] + 1 if body else lineno + 1)
        raise GraphParseError(where, f"expected {m} edge lines, found {len(body)}")

    edges = []
    pairs: dict[tuple[int, int], int] = {}
    for k, (lineno, toks) in enumerate(body):
        if len(toks) != 3:
            raise GraphParseError(lineno, "edge line must be 'u v w'")
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError:
            raise GraphParseError(lineno, "endpoints must be integers") from None
        if not (0 <= u < n and 0 <= v < n):
            raise GraphParseError(lineno, f"endpoint out of range [0, {n})")
        if u == v:
            raise GraphParseError(lineno, f"self-loop at vertex {u}")
        w = _parse_weight(toks[2], lineno)
        pair = (min(u, v), max(u, v))
        if pair in pairs:
            raise GraphParseError(lineno, f"duplicate edge {pair} (first on line {pairs[pair]})")
        pairs[pair] = lineno
        edges.append(make_edge(u, v, w, k))
    return Graph(n, tuple(edges))


def format_graph(g: Graph) -> str:
    """Inverse of :func:`parse_graph` for graphs whose ids are ``0..m-1``."""
    out = [f"{g.n} {g.m}"]
    for e in sorted(g.edges, key=lambda e: e.eid):
        out.append(f"{e.u} {e.v} {e.w!r}")
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class SplitMap:
    """Bookkeeping for a vertex-split graph.

    ``first[x]`` and ``count[x]`` give the consecutive range of new ids of
    original vertex ``x``.  ``origin`` maps each new edge id to the original
    edge id, or to ``None`` for a path edge.
    """
    first: tuple[int, ...]
    count: tuple[int, ...]
    origin: dict[int, int | None]

    @classmethod
    def identity(cls, g: Graph) -> SplitMap:
        return cls(tuple(range(g.n)), (1,) * g.n, {e.eid: e.eid for e in g.edges})

    @property
    def n_new(self) -> int:
        return sum(self.count)

    def owner_of(self) -> list[int]:
        """Original vertex of every new vertex."""
        own = [0] * self.n_new
        for x, (f, c) in enumerate(zip(self.first, self.count)):
            for k in range(f, f + c):
                own[k] = x
        return own

    @property
    def path_edges(self) -> list[int]:
        return [e for e, o in self.origin.items() if o is None]


@dataclass(frozen=True)
class ComponentGraph:
    """Graph whose vertices are components; its edges keep their original keys.

    Because keys are preserved, a component edge's ``eid`` is the id of the
    original edge it came from, so parallel edges stay distinguishable.
    """
    base: Graph
    weight: tuple[int, ...]

    def origin(self, eid: int) -> int:
        return eid


def component_graph(g: Graph, assignment) -> ComponentGraph:
    comp = assignment.comp
    if len(comp) != g.n:
        raise GraphError("component assignment does not cover the graph")
    k = max(comp) + 1 if g.n else 0
    sizes = [0] * k
    for c in comp:
        sizes[c] += 1
    edges = [
        e._replace(u=min(comp[e.u], comp[e.v]), v=max(comp[e.u], comp[e.v]))
        for e in g.edges
        if comp[e.u] != comp[e.v]
    ]
    return ComponentGraph(Graph(k, tuple(edges)), tuple(sizes))


# ---------------------------------------------------------------- generators

GENERATOR_PARAMS = {
    "gnm": ("n", "m"),
    "regular": ("n", "d"),
    "path": ("n",),
    "star": ("n",),
    "grid": ("rows", "cols"),
    "two-scale": ("n", "m"),
    "blocks": ("n", "m", "k"),
    "clusters": ("n", "k"),
}


def _decode_pairs(n: int, indices: Iterable[int]) -> list[tuple[int, int]]:
    # pair index k enumerates (u, v), u < v, row by row
    out = []
    for k in indices:
        # row u starts at u*n - u*(u+1)/2
        u = int((2 * n - 1 - math.sqrt((2 * n - 1) ** 2 - 8 * k)) // 2)
        while u > 0 and u * n - u * (u + 1) // 2 > k:
            u -= 1
        while (u + 1) * n - (u + 1) * (u + 2) // 2 <= k:
            u += 1
        start = u * n - u * (u + 1) // 2
        out.append((u, u + 1 + k - start))
    return out


def _random_pairs(n: int, m: int, rng: random.Random) -> list[tuple[int, int]]:
    total = n * (n - 1) // 2
    if m > total:
        raise GraphError(f"cannot place {m} edges on {n} vertices")
    return _decode_pairs(n, rng.sample(range(total), m))


def _weighted(n: int, pairs: Sequence[tuple[int, int]], rng: random.Random, wmax: int) -> Graph:
    return Graph(n, tuple(make_edge(u, v, rng.randint(1, wmax), k) for k, (u, v) in enumerate(pairs)))


def generate_graph(kind: str, seed: int = 0, wmax: int = 10**9, **params) -> Graph:
    """Deterministic test-corpus generator; see ``GENERATOR_PARAMS`` for kinds."""
    if kind not in GENERATOR_PARAMS:
        raise GraphError(f"unknown generator kind {kind!r}")
    missing = [p for p in GENERATOR_PARAMS[kind] if p not in params]
    if missing:
        raise GraphError(f"{kind} needs parameters {missing}")
    if wmax < 1:
        raise GraphError("wmax must be >= 1")
    p = {k: int(v) for k, v in params.items()}
    if any(v < 0 for v in p.values()):
        raise GraphError("generator parameters must be non-negative")
    rng = random.Random(f"{kind}:{seed}")

    if kind == "gnm":
        pairs = _random_pairs(p["n"], p["m"], rng)
        n = p["n"]
    elif kind == "path":
        n = p["n"]
        pairs = [(i, i + 1) for i in range(n - 1)]
    elif kind == "star":
        n = p["n"]
        pairs = [(0, i) for i in range(1, n)]
    elif kind == "grid":
        r, c = p["rows"], p["cols"]
        n = r * c
        pairs = []
        for i in range(r):
            for j in range(c):
                x = i * c + j
                if j + 1 < c:
                    pairs.append((x, x + 1))
                if i + 1 < r:
                    pairs.append((x, x + c))
    elif kind == "regular":
        n, d = p["n"], p["d"]
        if d >= n and n > 0:
            raise GraphError("degree must be < n")
        stubs = [x for x in range(n) for _ in range(d)]
        rng.shuffle(stubs)
        seen = set()
        pairs = []
        for a, b in zip(stubs[::2], stubs[1::2]):
            key = (min(a, b), max(a, b))
            if a != b and key not in seen:
                seen.add(key)
                pairs.append(key)
    elif kind == "two-scale":
        n, m = p["n"], p["m"]
        pairs = _two_scale(n, m, rng)
    elif kind == "clusters":
        n = p["n"]
        pairs = _clusters(n, p["k"], rng)
    else:  # blocks
        n, m, k = p["n"], p["m"], max(1, p["k"])
        pairs = []
        sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
        start = 0
        for i, s in enumerate(sizes):
            share = m // k + (1 if i < m % k else 0)
            share = min(share, s * (s - 1) // 2)
            pairs += [(start + a, start + b) for a, b in _random_pairs(s, share, rng)]
            start += s
    return _weighted(n, pairs, rng, wmax)


def _two_scale(n: int, m: int, rng: random.Random) -> list[tuple[int, int]]:
    """A few hubs with large degree over a sparse periphery."""
    total = n * (n - 1) // 2
    if m > total:
        raise GraphError(f"cannot place {m} edges on {n} vertices")
    if n < 2:
        return []
    hubs = max(1, n // 16)
    chosen: set[tuple[int, int]] = set()
    # periphery hangs off the hubs, sparse
    for x in range(hubs, n):
        if len(chosen) >= m // 2:
            break
        h = rng.randrange(hubs)
        chosen.add((h, x))
    # dense part among hubs and a slice of the periphery
    dense = min(n, max(hubs * 4, 2))
    dense_total = dense * (dense - 1) // 2
    want = min(dense_total, (m - len(chosen)) // 2)
    for a, b in _random_pairs(dense, want, rng):
        chosen.add((a, b))
    while len(chosen) < m:
        a, b = rng.sample(range(n), 2)
        chosen.add((min(a, b), max(a, b)))
    pairs = sorted(chosen)
    rng.shuffle(pairs)
    return pairs


def _clusters(n: int, k: int, rng: random.Random) -> list[tuple[int, int]]:
    """Star-like clusters of skewed sizes joined by bridge edges.

    Every cluster has two adjacent centres of degree at least 4.  A bridge
    ``u - v`` hangs ``u`` off both centres of one cluster and ``v`` off both
    centres of another, so neither endpoint prefers the bridge when marking
    neighbours and the clusters survive as separate components.
    """
    k = max(1, min(k, n // 8))
    if n < 8:
        return [(i, i + 1) for i in range(n - 1)]
    label = list(range(n))
    rng.shuffle(label)
    ids = iter(label)
    centres = [(next(ids), next(ids)) for _ in range(k)]
    pairs = [c for c in centres]
    for c in centres:
        for x in c:
            pairs += [(x, next(ids)) for _ in range(3)]
    rest = n - 8 * k
    bridges = rest // 4
    for _ in range(bridges):
        u, v = next(ids), next(ids)
        a, b = rng.randrange(k), rng.randrange(k)
        pairs += [(centres[a][0], u), (centres[a][1], u), (centres[b][0], v), (centres[b][1], v), (u, v)]
    weight = [2.0 ** rng.uniform(0, 6) for _ in range(k)]
    for x in ids:
        c = rng.choices(range(k), weight)[0]
        pairs.append((centres[c][rng.randrange(2)], x))
    pairs = [(min(a, b), max(a, b)) for a, b in pairs]
    rng.shuffle(pairs)
    return pairs


def parse_gen_spec(spec: str) -> tuple[str, dict[str, int], int]:
    """``"gnm:256,4096,seed=5"`` -> ``("gnm", {"n": 256, "m": 4096}, 5)``."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    if kind not in GENERATOR_PARAMS:
        raise GraphError(f"unknown generator kind {kind!r}")
    names = GENERATOR_PARAMS[kind]
    params: dict[str, int] = {}
    seed = 0
    positional = 0
    for tok in filter(None, (t.strip() for t in rest.split(","))):
        try:
            if "=" in tok:
                k, v = tok.split("=", 1)
                if k == "seed":
                    seed = int(v)
                else:
                    params[k] = int(v)
            else:
                if positional >= len(names):
                    raise GraphError(f"too many parameters for {kind}")
                params[names[positional]] = int(tok)
                positional += 1
        except ValueError:
            raise GraphError(f"bad generator parameter {tok!r}") from None
    return kind, params, seed


def generate_from_spec(spec: str) -> Graph:
    kind, params, seed = parse_gen_spec(spec)
    return generate_graph(kind, seed=seed, **params)

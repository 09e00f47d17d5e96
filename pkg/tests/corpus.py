"""Seeded graph corpus shared by the acceptance and property tests."""
from __future__ import annotations

import math
import random
from functools import lru_cache

from clique_mst.graph import Graph, generate_graph

DENSITIES = (1, 2, 8, 32, "n/4")
KINDS = ("gnm", "gnm", "two-scale", "blocks", "clusters", "regular", "grid", "path", "star")
CORPUS_SIZE = 520


def _params(kind: str, n: int, m: int, rng: random.Random) -> dict:
    if kind in ("gnm", "two-scale"):
        return {"n": n, "m": m}
    if kind == "blocks":
        k = rng.randint(2, max(2, min(8, n // 2)))
        sizes = [n // k + 1] * k
        return {"n": n, "m": min(m, sum(s * (s - 1) // 2 for s in sizes)), "k": k}
    if kind == "clusters":
        return {"n": n, "k": rng.randint(1, max(1, n // 8))}
    if kind == "regular":
        return {"n": n, "d": min(n - 1, max(1, 2 * m // n))}
    if kind == "grid":
        rows = max(1, int(math.isqrt(n)))
        return {"rows": rows, "cols": max(1, n // rows)}
    return {"n": n}


@lru_cache(maxsize=None)
def corpus(size: int = CORPUS_SIZE, n_max: int = 512) -> tuple[tuple[str, Graph], ...]:
    """``(label, graph)`` pairs; n is log-uniform in [2, n_max], densities cycle."""
    rng = random.Random("acceptance-corpus")
    out = []
    for i in range(size):
        n = max(2, min(n_max, round(2 ** rng.uniform(1, math.log2(n_max)))))
        dens = DENSITIES[i % len(DENSITIES)]
        m = n * n // 4 if dens == "n/4" else dens * n
        m = max(1, min(m, n * (n - 1) // 2))
        kind = KINDS[(i + i // len(DENSITIES)) % len(KINDS)]
        params = _params(kind, n, m, rng)
        g = generate_graph(kind, seed=i, **params)
        label = f"{i}:{kind}:" + ",".join(f"{k}={v}" for k, v in params.items())
        out.append((label, g))
    return tuple(out)

"""Seeded random instance generators.  Every generated network is connected."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .graph import SocialNetwork, TrueProfile

KINDS = ("path", "tree", "gnp-connected", "layered")
_MAX_TRIES = 10_000


def _values(n: int, rng: np.random.Generator) -> TrueProfile:
    return TrueProfile({i: Fraction(int(k), 100) for i, k in enumerate(rng.integers(0, 101, size=n))})


def path(n: int, rng: np.random.Generator) -> tuple[SocialNetwork, TrueProfile]:
    if n < 1:
        raise ValueError("need at least one node")
    net = SocialNetwork(range(n), [(i, i + 1) for i in range(n - 1)], [0])
    return net, _values(n, rng)


def tree(n: int, rng: np.random.Generator) -> tuple[SocialNetwork, TrueProfile]:
    """Random recursive tree hanging from the seller (node 0 is always a seller neighbour)."""
    if n < 1:
        raise ValueError("need at least one node")
    rs = [0]
    edges = []
    for i in range(1, n):
        parent = int(rng.integers(-1, i))
        if parent < 0:
            rs.append(i)
        else:
            edges.append((parent, i))
    return SocialNetwork(range(n), edges, rs), _values(n, rng)


def gnp_connected(n: int, p: float, rng: np.random.Generator) -> tuple[SocialNetwork, TrueProfile]:
    """Directed G(n, p) plus a G(n, p) seller neighbourhood, resampled until connected."""
    if n < 1 or not 0 < p <= 1:
        raise ValueError("need n >= 1 and 0 < p <= 1")
    for _ in range(_MAX_TRIES):
        adj = rng.random((n, n)) < p
        rs = np.flatnonzero(rng.random(n) < p)
        edges = [(int(i), int(j)) for i, j in zip(*np.nonzero(adj)) if i != j]
        if len(rs) == 0:
            continue
        net = SocialNetwork(range(n), edges, [int(x) for x in rs])
        if not net.unreachable():
            return net, _values(n, rng)
    raise ValueError(f"no connected instance found for n={n}, p={p}")


def layered(n: int, layers: int, rng: np.random.Generator) -> tuple[SocialNetwork, TrueProfile]:
    """Nodes spread over ``layers`` BFS layers; forward edges between consecutive
    layers (each node keeps at least one), plus occasional same-layer and skip edges."""
    if layers < 1 or n < layers:
        raise ValueError("need n >= layers >= 1")
    cuts = np.sort(rng.choice(np.arange(1, n), size=layers - 1, replace=False)) if layers > 1 else []
    level = np.zeros(n, dtype=int)
    for c in cuts:
        level[c:] += 1
    edges = set()
    for i in range(n):
        if level[i] == 0:
            continue
        prev = np.flatnonzero(level == level[i] - 1)
        edges.add((int(rng.choice(prev)), i))
        for j in prev:
            if rng.random() < 0.3:
                edges.add((int(j), i))
    for i in range(n):
        for j in range(n):
            if i != j and level[j] in (level[i], level[i] + 2) and rng.random() < 0.15:
                edges.add((i, j))
    rs = [int(i) for i in np.flatnonzero(level == 0)]
    return SocialNetwork(range(n), sorted(edges), rs), _values(n, rng)


def generate(kind: str, n: int, rng: np.random.Generator, p: float = 0.4, layers: int = 2):
    if kind == "path":
        return path(n, rng)
    if kind == "tree":
        return tree(n, rng)
    if kind == "gnp-connected":
        return gnp_connected(n, p, rng)
    if kind == "layered":
        return layered(n, min(layers, n), rng)
    raise ValueError(f"unknown generator {kind!r}; choose from {', '.join(KINDS)}")

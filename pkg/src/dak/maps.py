"""Maps from reported graphs to distributions over buyer orderings.

Three kinds are provided: the breadth-first map (uniform shuffle of each BFS
layer), the generalized breadth-first map (uniform draw from the frontier)
and a weighted frontier variant.  Each kind can be sampled with an explicit
generator or enumerated exactly when the participant count is small.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

import numpy as np

from .graph import (SocialNetwork, ReportProfile, critical_descendants, layered_subgraph,
                    participation_closure)
from .pdm import draw_index

DEFAULT_EXACT_CAP = 9


class ExactModeInfeasible(RuntimeError):
    """Raised when exact enumeration would exceed the participant cap."""


def exact_cap() -> int:
    return int(os.environ.get("DAK_EXACT_CAP", DEFAULT_EXACT_CAP))


def _check_cap(count: int, cap: Optional[int]) -> None:
    cap = exact_cap() if cap is None else cap
    if count > cap:
        raise ExactModeInfeasible(
            f"exact mode infeasible: {count} participants exceed the cap of {cap}; "
            "use Monte Carlo mode (or raise DAK_EXACT_CAP)")


@dataclass(frozen=True)
class BreadthFirst:
    name = "bf"


@dataclass(frozen=True)
class GeneralizedBreadthFirst:
    name = "gbf"


@dataclass(frozen=True)
class WeightedGBF:
    """Frontier draw proportional to ``weight(node)``.

    With no weight function the weight is ``1 + number of invited participants``.
    """
    weight: Optional[Callable[[int], object]] = None
    name = "wgbf"


MapKind = BreadthFirst | GeneralizedBreadthFirst | WeightedGBF


@dataclass(frozen=True)
class PermutationDistribution:
    support: tuple

    def __init__(self, support: Iterable[tuple[tuple, Fraction]]):
        merged: dict[tuple, Fraction] = {}
        for order, p in support:
            order = tuple(order)
            if order in merged:
                raise ValueError(f"duplicate ordering {order}")
            merged[order] = Fraction(p)
        if not merged:
            raise ValueError("empty distribution")
        if any(p <= 0 for p in merged.values()):
            raise ValueError("probabilities must be positive")
        if sum(merged.values()) != 1:
            raise ValueError("probabilities must sum to exactly 1")
        first = set(next(iter(merged)))
        for order in merged:
            if set(order) != first or len(order) != len(first):
                raise ValueError("orderings must be permutations of one participant set")
        object.__setattr__(self, "support", tuple(sorted(merged.items())))

    @property
    def nodes(self) -> frozenset:
        return frozenset(self.support[0][0])

    def prob(self, order) -> Fraction:
        return dict(self.support).get(tuple(order), Fraction(0))

    def __iter__(self):
        return iter(self.support)

    def __len__(self):
        return len(self.support)


# --------------------------------------------------------------------------

def bfs_layers(net: SocialNetwork, profile: ReportProfile) -> list:
    d, _ = layered_subgraph(net, profile)
    layers: dict[int, list] = {}
    for i, k in d.items():
        layers.setdefault(k, []).append(i)
    return [sorted(layers[k]) for k in sorted(layers)]


def _invited_participants(net, profile, part):
    return {i: sorted(j for j in profile[i].invited if j in part) for i in part}


def _weights(kind: WeightedGBF, adj: dict) -> dict:
    if kind.weight is None:
        return {i: Fraction(1 + len(adj[i])) for i in adj}
    w = {i: Fraction(kind.weight(i)) for i in adj}
    if any(x <= 0 for x in w.values()):
        raise ValueError("weights must be positive")
    return w


def sample_order(kind: MapKind, net: SocialNetwork, profile: ReportProfile,
                 rng: np.random.Generator) -> tuple:
    part = participation_closure(net, profile)
    if not part:
        raise ValueError("no participants")
    if isinstance(kind, BreadthFirst):
        out = []
        for layer in bfs_layers(net, profile):
            out.extend(int(x) for x in rng.permutation(layer))
        return tuple(out)
    pset = set(part)
    adj = _invited_participants(net, profile, pset)
    weights = _weights(kind, adj) if isinstance(kind, WeightedGBF) else None
    frontier = sorted(i for i in part if i in net.seller_neighbors)
    chosen: set = set()
    out = []
    while frontier:
        if weights is None:
            idx = int(rng.integers(len(frontier)))
        else:
            total = sum(weights[x] for x in frontier)
            idx = draw_index([weights[x] / total for x in frontier], rng.random())
        j = frontier.pop(idx)
        out.append(j)
        chosen.add(j)
        frontier = sorted(set(frontier) | (set(adj[j]) - chosen))
    return tuple(out)


def enumerate_distribution(kind: MapKind, net: SocialNetwork, profile: ReportProfile,
                           cap: Optional[int] = None) -> PermutationDistribution:
    part = participation_closure(net, profile)
    if not part:
        raise ValueError("no participants")
    _check_cap(len(part), cap)
    if isinstance(kind, BreadthFirst):
        layers = bfs_layers(net, profile)
        p = Fraction(1, math.prod(math.factorial(len(layer)) for layer in layers))
        support = [(tuple(itertools.chain.from_iterable(combo)), p)
                   for combo in itertools.product(*(itertools.permutations(layer) for layer in layers))]
        return PermutationDistribution(support)

    pset = set(part)
    adj = _invited_participants(net, profile, pset)
    weights = _weights(kind, adj) if isinstance(kind, WeightedGBF) else None
    support = []

    def expand(prefix, chosen, frontier, p):
        if not frontier:
            support.append((tuple(prefix), p))
            return
        if weights is None:
            total = len(frontier)
        else:
            total = sum(weights[x] for x in frontier)
        for j in frontier:
            share = Fraction(1, total) if weights is None else weights[j] / total
            nxt = (frontier - {j}) | (set(adj[j]) - chosen - {j})
            prefix.append(j)
            expand(prefix, chosen | {j}, frozenset(nxt), p * share)
            prefix.pop()

    expand([], frozenset(), frozenset(i for i in part if i in net.seller_neighbors), Fraction(1))
    return PermutationDistribution(support)


def verify_order_preserving(dist: PermutationDistribution, net: SocialNetwork,
                            profile: ReportProfile) -> tuple[bool, list]:
    """Every support ordering must list each critical node before its descendants.

    Violations are ``(ordering, (ancestor, descendant))`` pairs.
    """
    desc = {i: critical_descendants(net, profile, i) for i in participation_closure(net, profile)}
    violations = []
    for order, _ in dist:
        pos = {x: k for k, x in enumerate(order)}
        for j, below in desc.items():
            for k in sorted(below):
                if k != j and pos[k] < pos[j]:
                    violations.append((order, (j, k)))
    return not violations, violations


def prefix_set_masses(dist: PermutationDistribution, i: int) -> dict:
    """``q_A``: probability that exactly the set ``A`` precedes ``i``."""
    q: dict[frozenset, Fraction] = {}
    for order, p in dist:
        if i not in order:
            raise ValueError(f"buyer {i} does not appear in the distribution")
        pre = frozenset(order[:order.index(i)])
        q[pre] = q.get(pre, Fraction(0)) + p
    return q


def stochastically_dominates(mu1: PermutationDistribution, mu2: PermutationDistribution,
                             i: int, universe: Optional[Iterable[int]] = None,
                             cap: Optional[int] = None) -> bool:
    """For every ``A`` in ``universe - {i}``: ``P1[preds of i within A] >= P2[same]``."""
    uni = sorted(set(universe) if universe is not None else (mu1.nodes | mu2.nodes))
    _check_cap(len(uni), cap)
    others = [x for x in uni if x != i]
    bit = {x: 1 << k for k, x in enumerate(others)}
    size = 1 << len(others)

    def cumulative(mu):
        arr = [Fraction(0)] * size
        for pre, p in prefix_set_masses(mu, i).items():
            mask = 0
            for x in pre:
                if x not in bit:
                    raise ValueError(f"predecessor {x} outside the universe")
                mask |= bit[x]
            arr[mask] += p
        # subset-sum (zeta) transform
        for k in range(len(others)):
            b = 1 << k
            for mask in range(size):
                if mask & b:
                    arr[mask] += arr[mask ^ b]
        return arr

    c1, c2 = cumulative(mu1), cumulative(mu2)
    return all(a >= b for a, b in zip(c1, c2))


def q_invariance_witness(kind: MapKind, net: SocialNetwork, profile: ReportProfile,
                         dev_net: SocialNetwork, dev_profile: ReportProfile, i: int,
                         cap: Optional[int] = None):
    """Compare ``q_A`` for buyer ``i`` before and after a deviation by ``i``.

    Returns ``None`` when every prefix-set mass is unchanged, otherwise
    ``(A, q_before, q_after)`` for the lexicographically first differing set.
    """
    before = prefix_set_masses(enumerate_distribution(kind, net, profile, cap), i)
    after = prefix_set_masses(enumerate_distribution(kind, dev_net, dev_profile, cap), i)
    for key in sorted(set(before) | set(after), key=lambda s: (len(s), sorted(s))):
        a, b = before.get(key, Fraction(0)), after.get(key, Fraction(0))
        if a != b:
            return key, a, b
    return None

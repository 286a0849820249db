"""Social networks, reported profiles and the structural graph algorithms.

Buyers are dense integer ids ``0..n-1``.  The seller is not a node; where a
structure needs to name it (dominator trees) the sentinel :data:`SELLER` is
used.  Every algorithm here works on the *reported* graph: the participants
reachable from the seller through invitations of non-absent buyers.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Optional

SELLER = -1


class GraphError(ValueError):
    """Malformed network, profile, or a structural precondition violated."""


def as_rational(x) -> Fraction:
    """Parse a bid/valuation exactly.  Floats go through ``repr`` so 0.1 -> 1/10."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a valuation")
    if isinstance(x, (int, Decimal)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise GraphError(f"not a rational number: {x!r}") from exc
    raise TypeError(f"cannot read {type(x).__name__} as a rational")


def _unit(x, what: str) -> Fraction:
    q = as_rational(x)
    if not 0 <= q <= 1:
        raise GraphError(f"{what} {q} outside [0, 1]")
    return q


@dataclass(frozen=True)
class SocialNetwork:
    nodes: frozenset
    edges: frozenset
    seller_neighbors: frozenset
    _out: dict = field(init=False, repr=False, compare=False, hash=False)

    def __init__(self, nodes: Iterable[int], edges: Iterable[tuple[int, int]],
                 seller_neighbors: Iterable[int]):
        nodes = frozenset(int(i) for i in nodes)
        edges = frozenset((int(i), int(j)) for i, j in edges)
        rs = frozenset(int(i) for i in seller_neighbors)
        for i, j in edges:
            if i == j:
                raise GraphError(f"self-loop on node {i}")
            if i not in nodes or j not in nodes:
                raise GraphError(f"edge ({i}, {j}) has an endpoint outside the node set")
        if not rs <= nodes:
            raise GraphError(f"seller neighbors {sorted(rs - nodes)} are not nodes")
        if SELLER in nodes:
            raise GraphError("the seller sentinel cannot be a buyer id")
        out: dict[int, frozenset] = {i: frozenset() for i in nodes}
        tmp: dict[int, set] = {i: set() for i in nodes}
        for i, j in edges:
            tmp[i].add(j)
        for i in nodes:
            out[i] = frozenset(tmp[i])
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "seller_neighbors", rs)
        object.__setattr__(self, "_out", out)

    def out_neighbors(self, i: int) -> frozenset:
        return self._out[i]

    @property
    def n(self) -> int:
        return len(self.nodes)

    def unreachable(self) -> list[int]:
        """Nodes the seller cannot reach when everybody invites everybody."""
        seen = set(self.seller_neighbors)
        queue = deque(sorted(self.seller_neighbors))
        while queue:
            u = queue.popleft()
            for v in sorted(self._out[u]):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return sorted(self.nodes - seen)

    def require_connected(self) -> None:
        missing = self.unreachable()
        if missing:
            raise GraphError(f"nodes unreachable from the seller: {missing}")

    def with_edges(self, extra: Iterable[tuple[int, int]], new_nodes: Iterable[int] = ()) -> "SocialNetwork":
        return SocialNetwork(self.nodes | set(new_nodes), self.edges | set(extra), self.seller_neighbors)


@dataclass(frozen=True)
class Report:
    bid: Fraction
    invited: frozenset

    def __init__(self, bid, invited: Iterable[int] = ()):
        object.__setattr__(self, "bid", _unit(bid, "bid"))
        object.__setattr__(self, "invited", frozenset(invited))


ABSENT = None


class ReportProfile(Mapping):
    """Per-node report or ``None`` (absent).  Validated against a network."""

    __slots__ = ("net", "_reports")

    def __init__(self, net: SocialNetwork, reports: Mapping[int, Optional[Report]]):
        unknown = set(reports) - net.nodes
        if unknown:
            raise GraphError(f"reports for unknown nodes {sorted(unknown)}")
        full = {}
        for i in sorted(net.nodes):
            rep = reports.get(i)
            if rep is not None:
                extra = rep.invited - net.out_neighbors(i)
                if extra:
                    raise GraphError(f"node {i} invites non-neighbors {sorted(extra)}")
            full[i] = rep
        self.net = net
        self._reports = full

    @classmethod
    def truthful(cls, net: SocialNetwork, truth: "TrueProfile") -> "ReportProfile":
        return cls(net, {i: Report(truth[i], net.out_neighbors(i)) for i in net.nodes})

    def replace(self, updates: Mapping[int, Optional[Report]], net: Optional[SocialNetwork] = None) -> "ReportProfile":
        reports = dict(self._reports)
        reports.update(updates)
        return ReportProfile(net or self.net, reports)

    def bids(self) -> dict[int, Fraction]:
        return {i: r.bid for i, r in self._reports.items() if r is not None}

    def __getitem__(self, i):
        return self._reports[i]

    def __iter__(self):
        return iter(self._reports)

    def __len__(self):
        return len(self._reports)

    def __repr__(self):
        return f"ReportProfile({self._reports!r})"


class TrueProfile(Mapping):
    """True valuations; true neighbor sets are the network's out-edges."""

    __slots__ = ("_v",)

    def __init__(self, valuations: Mapping[int, object], net: Optional[SocialNetwork] = None):
        self._v = {int(i): _unit(v, f"valuation of {i}") for i, v in valuations.items()}
        if net is not None and set(self._v) != set(net.nodes):
            raise GraphError("valuations must have exactly one entry per node")

    def __getitem__(self, i):
        return self._v[i]

    def __iter__(self):
        return iter(self._v)

    def __len__(self):
        return len(self._v)

    def with_values(self, updates: Mapping[int, object]) -> "TrueProfile":
        v = dict(self._v)
        v.update(updates)
        return TrueProfile(v)

    def __repr__(self):
        return "TrueProfile({%s})" % ", ".join(f"{i}: {str(v)!r}" for i, v in self._v.items())


# --------------------------------------------------------------------------
# reachability

def _closure(net: SocialNetwork, profile: ReportProfile, banned: frozenset = frozenset()) -> tuple:
    seen = set()
    order = []
    queue = deque()
    for i in sorted(net.seller_neighbors):
        if i not in banned and profile[i] is not None:
            seen.add(i)
            order.append(i)
            queue.append(i)
    while queue:
        u = queue.popleft()
        for v in sorted(profile[u].invited):
            if v not in seen and v not in banned and profile[v] is not None:
                seen.add(v)
                order.append(v)
                queue.append(v)
    return tuple(order)


def participation_closure(net: SocialNetwork, profile: ReportProfile) -> tuple:
    """Participants in BFS discovery order."""
    return _closure(net, profile)


def reported_edges(net: SocialNetwork, profile: ReportProfile) -> frozenset:
    part = set(_closure(net, profile))
    return frozenset((i, j) for i in part for j in profile[i].invited if j in part)


def _require_participant(net, profile, *nodes):
    part = set(_closure(net, profile))
    for i in nodes:
        if i not in part:
            raise GraphError(f"node {i} is not a participant")
    return part


def removed_without(net: SocialNetwork, profile: ReportProfile, i: int) -> frozenset:
    """Participants that remain when ``i`` is not invited (``N_{-i}``)."""
    _require_participant(net, profile, i)
    return frozenset(_closure(net, profile, frozenset([i])))


def critical_descendants(net: SocialNetwork, profile: ReportProfile, i: int) -> frozenset:
    """``{j | i precedes-critically j}``, including ``i`` itself."""
    part = _require_participant(net, profile, i)
    return frozenset(part) - set(_closure(net, profile, frozenset([i])))


def is_diffusion_critical(net: SocialNetwork, profile: ReportProfile, i: int, j: int) -> bool:
    _require_participant(net, profile, i, j)
    if i == j:
        return True
    return j not in _closure(net, profile, frozenset([i]))


def layered_subgraph(net: SocialNetwork, profile: ReportProfile) -> tuple[dict, frozenset]:
    """Seller distances and the edges joining consecutive BFS layers."""
    part = _closure(net, profile)
    pset = set(part)
    d = {}
    queue = deque()
    for i in part:
        if i in net.seller_neighbors:
            d[i] = 1
            queue.append(i)
    while queue:
        u = queue.popleft()
        for v in sorted(profile[u].invited):
            if v in pset and v not in d:
                d[v] = d[u] + 1
                queue.append(v)
    eprime = frozenset((j, i) for j in part for i in profile[j].invited
                       if i in pset and d[i] == d[j] + 1)
    return d, eprime


def dominator_tree(d: Mapping[int, int], eprime: Iterable[tuple[int, int]],
                   seller_neighbors: Iterable[int]) -> dict[int, int]:
    """Immediate dominators of the layered rooted graph ``(N + s, E' + r_s, s)``.

    Nodes are processed by increasing distance; a node's immediate dominator
    is the lowest common ancestor of its predecessors in the tree built so far.
    """
    rs = set(seller_neighbors)
    preds: dict[int, list] = {i: [] for i in d}
    for j, i in eprime:
        preds[i].append(j)
    parent: dict[int, int] = {}
    depth = {SELLER: 0}

    def lca(a, b):
        while depth[a] > depth[b]:
            a = parent[a]
        while depth[b] > depth[a]:
            b = parent[b]
        while a != b:
            a, b = parent[a], parent[b]
        return a

    for i in sorted(d, key=lambda x: (d[x], x)):
        ps = list(preds[i])
        if i in rs:
            ps.append(SELLER)
        if not ps:
            raise GraphError(f"node {i} has no predecessor in the layered graph")
        anc = ps[0]
        for p in ps[1:]:
            if anc == SELLER:
                break
            anc = lca(anc, p)
        parent[i] = anc
        depth[i] = depth[anc] + 1
    return parent


def reachable_from(eprime: Iterable[tuple[int, int]], start: int) -> frozenset:
    adj: dict[int, list] = {}
    for a, b in eprime:
        adj.setdefault(a, []).append(b)
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return frozenset(seen)


def components_without_seller(net: SocialNetwork, profile: ReportProfile, i: int) -> frozenset:
    """``N_{-C_i}``: participants outside ``i``'s weakly connected component."""
    part = _require_participant(net, profile, i)
    adj: dict[int, set] = {u: set() for u in part}
    for a, b in reported_edges(net, profile):
        adj[a].add(b)
        adj[b].add(a)
    comp = {i}
    stack = [i]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in comp:
                comp.add(v)
                stack.append(v)
    return frozenset(part) - comp

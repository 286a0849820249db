"""Multi-unit mechanisms: MUPDM and its Sybil-proof refinement SP-MUPDM.

Both split the participants into ``k = min(m, |r_s|)`` disjoint path graphs
headed by the first ``k`` buyers of a breadth-first ordering and run PDM on
each path independently.  They differ in how later buyers pick a path and in
the surcharge base of each head.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .engine import Case, Lottery, evaluate, surcharge_of
from .graph import (SELLER, SocialNetwork, ReportProfile, TrueProfile, GraphError, critical_descendants,
                    dominator_tree, layered_subgraph, participation_closure, reachable_from)
from .maps import BreadthFirst, ExactModeInfeasible, _check_cap, enumerate_distribution, exact_cap, sample_order
from .pdm import PathInstance, pdm_sample

ZERO = Fraction(0)


@dataclass(frozen=True)
class PathAssignment:
    paths: tuple          # k tuples of buyers, head first
    bases: tuple          # surcharge base per head
    surcharges: tuple
    k: int

    @property
    def heads(self) -> tuple:
        return tuple(p[0] for p in self.paths)


@dataclass
class MultiOutcome:
    win_probability: dict
    utility: dict
    payment: dict
    welfare: Fraction
    revenue: Fraction
    gross_payments: Fraction
    gross_rewards: Fraction
    breakdown: list       # CaseResult per distinct assignment
    items: int


@dataclass(frozen=True)
class MultiRealization:
    paths: tuple
    winners: tuple        # one per path
    transfers: dict
    revenue: Fraction
    welfare: Fraction


def _k(net: SocialNetwork, profile: ReportProfile, m: int) -> int:
    if m < 1:
        raise ValueError("the item count m must be at least 1")
    part = participation_closure(net, profile)
    if not part:
        raise GraphError("no participants")
    return min(m, sum(1 for i in part if i in net.seller_neighbors))


def _mupdm_bases(net, profile, paths) -> tuple:
    bases = []
    for p in paths:
        below = critical_descendants(net, profile, p[0])
        bases.append(frozenset(x for x in p if x not in below))
    return tuple(bases)


def _spmupdm_bases(eprime, paths) -> tuple:
    return tuple(frozenset(p) - reachable_from(eprime, p[0]) for p in paths)


def _assignment(paths, bases, profile) -> PathAssignment:
    bids = profile.bids()
    paths = tuple(tuple(p) for p in paths)
    return PathAssignment(paths, bases, tuple(surcharge_of(b, bids) for b in bases), len(paths))


def mupdm_assign(net: SocialNetwork, profile: ReportProfile, m: int,
                 rng: np.random.Generator) -> PathAssignment:
    k = _k(net, profile, m)
    order = sample_order(BreadthFirst(), net, profile, rng)
    paths = [[x] for x in order[:k]]
    for x in order[k:]:
        paths[int(rng.integers(k))].append(x)
    return _assignment(paths, _mupdm_bases(net, profile, paths), profile)


def _dominators(net, profile):
    d, eprime = layered_subgraph(net, profile)
    return dominator_tree(d, eprime, net.seller_neighbors), eprime


def spmupdm_map(net: SocialNetwork, profile: ReportProfile, m: int,
                rng: np.random.Generator) -> PathAssignment:
    k = _k(net, profile, m)
    dom, eprime = _dominators(net, profile)
    order = sample_order(BreadthFirst(), net, profile, rng)
    paths = [[x] for x in order[:k]]
    where = {x: idx for idx, x in enumerate(order[:k])}
    for x in order[k:]:
        idx = int(rng.integers(k)) if dom[x] == SELLER else where[dom[x]]
        paths[idx].append(x)
        where[x] = idx
    return _assignment(paths, _spmupdm_bases(eprime, paths), profile)


def _case_budget() -> int:
    return math.factorial(exact_cap())


def _enumerate(net, profile, m, cap, sybil_proof: bool) -> Lottery:
    k = _k(net, profile, m)
    part = participation_closure(net, profile)
    _check_cap(len(part), cap)
    dist = enumerate_distribution(BreadthFirst(), net, profile, cap)
    if sybil_proof:
        dom, eprime = _dominators(net, profile)
    free_count = (len(part) - k) if not sybil_proof else sum(
        1 for x in part if dom[x] == SELLER) - k
    budget = _case_budget() if cap is None else math.factorial(cap)
    if len(dist) * k ** free_count > budget:
        raise ExactModeInfeasibleCases(len(dist) * k ** free_count, budget)
    cases = []
    for order, p in dist:
        rest = order[k:]
        free = [x for x in rest if not sybil_proof or dom[x] == SELLER]
        share = p / k ** len(free)
        for choice in itertools.product(range(k), repeat=len(free)):
            pick = dict(zip(free, choice))
            paths = [[x] for x in order[:k]]
            where = {x: idx for idx, x in enumerate(order[:k])}
            for x in rest:
                idx = pick[x] if x in pick else where[dom[x]]
                paths[idx].append(x)
                where[x] = idx
            paths = tuple(tuple(q) for q in paths)
            bases = _spmupdm_bases(eprime, paths) if sybil_proof else _mupdm_bases(net, profile, paths)
            cases.append(Case(paths, bases, share))
    return Lottery.merged(cases, m)


class ExactModeInfeasibleCases(ExactModeInfeasible):
    def __init__(self, count: int, budget: int):
        super().__init__(f"exact mode infeasible: {count} path assignments exceed the budget of {budget}; "
                         "use Monte Carlo mode (or raise DAK_EXACT_CAP)")


def mupdm_lottery(net: SocialNetwork, profile: ReportProfile, m: int, cap: Optional[int] = None) -> Lottery:
    return _enumerate(net, profile, m, cap, sybil_proof=False)


def spmupdm_lottery(net: SocialNetwork, profile: ReportProfile, m: int, cap: Optional[int] = None) -> Lottery:
    return _enumerate(net, profile, m, cap, sybil_proof=True)


def multi_outcome(lottery: Lottery, profile: ReportProfile, truth: TrueProfile, nodes) -> MultiOutcome:
    agg = evaluate(lottery, profile.bids(), truth, nodes)
    return MultiOutcome(agg.win_probability, agg.utility, agg.payment, agg.welfare, agg.revenue,
                        agg.gross_payments, agg.gross_rewards, agg.cases, lottery.items)


def mupdm_expected(net: SocialNetwork, profile: ReportProfile, truth: TrueProfile, m: int,
                   cap: Optional[int] = None) -> MultiOutcome:
    return multi_outcome(mupdm_lottery(net, profile, m, cap), profile, truth, net.nodes)


def spmupdm_expected(net: SocialNetwork, profile: ReportProfile, truth: TrueProfile, m: int,
                     cap: Optional[int] = None) -> MultiOutcome:
    return multi_outcome(spmupdm_lottery(net, profile, m, cap), profile, truth, net.nodes)


def multi_run(assignment: PathAssignment, profile: ReportProfile, truth: TrueProfile,
              rng: np.random.Generator) -> MultiRealization:
    """Sample one winner per path (paths in order) and settle all transfers."""
    bids = profile.bids()
    transfers = {}
    winners = []
    welfare = ZERO
    for path, sur in zip(assignment.paths, assignment.surcharges):
        w, pay = pdm_sample(PathInstance([bids[x] for x in path]), rng)
        for pos, x in enumerate(path):
            transfers[x] = pay[pos]
        transfers[path[0]] += sur
        winners.append(path[w])
        welfare += truth[path[w]]
    return MultiRealization(assignment.paths, tuple(winners), transfers,
                            sum(transfers.values(), ZERO), welfare)

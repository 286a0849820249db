"""f-PDM: map the reported graph to a random path, run PDM, surcharge the head."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .engine import Case, Lottery, evaluate, surcharge_of
from .graph import (SocialNetwork, ReportProfile, TrueProfile, GraphError, components_without_seller,
                    participation_closure, removed_without)
from .maps import BreadthFirst, MapKind, enumerate_distribution, sample_order
from .pdm import ExpectedStats, PathInstance, pdm_sample

ZERO = Fraction(0)


class SurchargeVariant(enum.Enum):
    STANDARD = "standard"
    COLLUSION_PROOF = "collusion-proof"


@dataclass(frozen=True)
class OrderingCase:
    ordering: tuple
    probability: Fraction
    stats: ExpectedStats
    surcharge: Fraction

    @property
    def head(self) -> int:
        return self.ordering[0]


@dataclass
class ExpectedOutcome:
    win_probability: dict
    utility: dict
    payment: dict
    welfare: Fraction
    revenue: Fraction
    gross_payments: Fraction = ZERO
    gross_rewards: Fraction = ZERO
    breakdown: list = field(default_factory=list)
    items: int = 1


@dataclass(frozen=True)
class Realization:
    ordering: tuple
    winner: int
    transfers: dict      # positive: buyer pays the seller
    revenue: Fraction
    welfare: Fraction


def surcharge_base(net: SocialNetwork, profile: ReportProfile, head: int,
                   variant: SurchargeVariant = SurchargeVariant.STANDARD) -> frozenset:
    if variant is SurchargeVariant.STANDARD:
        return removed_without(net, profile, head)
    return components_without_seller(net, profile, head)


def head_surcharge(net: SocialNetwork, profile: ReportProfile, head: int,
                   variant: SurchargeVariant = SurchargeVariant.STANDARD) -> Fraction:
    return surcharge_of(surcharge_base(net, profile, head, variant), profile.bids())


def _check_variant(kind, variant):
    if variant is SurchargeVariant.COLLUSION_PROOF and not isinstance(kind, BreadthFirst):
        raise ValueError("the collusion-proof surcharge is only defined with the breadth-first map")


def fpdm_lottery(net: SocialNetwork, profile: ReportProfile, kind: MapKind = BreadthFirst(),
                 variant: SurchargeVariant = SurchargeVariant.STANDARD,
                 cap: Optional[int] = None) -> Lottery:
    _check_variant(kind, variant)
    dist = enumerate_distribution(kind, net, profile, cap)
    bases = {}
    cases = []
    for order, p in dist:
        head = order[0]
        if head not in bases:
            bases[head] = surcharge_base(net, profile, head, variant)
        cases.append(Case((order,), (bases[head],), p))
    return Lottery(tuple(cases), 1)


def outcome_from_lottery(lottery: Lottery, profile: ReportProfile, truth: TrueProfile,
                         nodes) -> ExpectedOutcome:
    agg = evaluate(lottery, profile.bids(), truth, nodes)
    breakdown = [OrderingCase(r.case.paths[0], r.case.probability, r.paths[0].stats, r.paths[0].surcharge)
                 for r in agg.cases]
    return ExpectedOutcome(agg.win_probability, agg.utility, agg.payment, agg.welfare, agg.revenue,
                           agg.gross_payments, agg.gross_rewards, breakdown, lottery.items)


def fpdm_expected(net: SocialNetwork, profile: ReportProfile, truth: TrueProfile,
                  kind: MapKind = BreadthFirst(),
                  variant: SurchargeVariant = SurchargeVariant.STANDARD,
                  cap: Optional[int] = None) -> ExpectedOutcome:
    """Exact expected outcome of f-PDM, with a per-ordering breakdown."""
    if not participation_closure(net, profile):
        raise GraphError("no participants")
    return outcome_from_lottery(fpdm_lottery(net, profile, kind, variant, cap), profile, truth, net.nodes)


def fpdm_sample(net: SocialNetwork, profile: ReportProfile, truth: TrueProfile,
                kind: MapKind, variant: SurchargeVariant, rng: np.random.Generator) -> Realization:
    """One realisation.  Consumes the ordering draws first, then one winner draw."""
    _check_variant(kind, variant)
    order = sample_order(kind, net, profile, rng)
    bids = profile.bids()
    inst = PathInstance([bids[x] for x in order])
    w, pay = pdm_sample(inst, rng)
    transfers = {x: pay[k] for k, x in enumerate(order)}
    sur = head_surcharge(net, profile, order[0], variant)
    transfers[order[0]] += sur
    revenue = sum(transfers.values(), ZERO)
    return Realization(order, order[w], transfers, revenue, truth[order[w]])


def realized_utilities(real: Realization, truth: TrueProfile) -> dict:
    return {x: (truth[x] if x == real.winner else ZERO) - t for x, t in real.transfers.items()}

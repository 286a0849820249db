"""Approximate-efficiency and approximate-revenue checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from ..graph import SocialNetwork, ReportProfile, critical_descendants, participation_closure

ZERO = Fraction(0)
DEFAULT_DELTAS = tuple(Fraction(k, 10) for k in range(1, 10))
# a rational upper bound on e; e/(e-1) decreases in e, so this shrinks epsilon
E_UPPER = Fraction("2.718282")


@dataclass
class BoundRecord:
    delta: Fraction
    epsilon: Fraction
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs

    @property
    def margin(self) -> Fraction:
        return self.lhs - self.rhs


@dataclass
class EfficiencyReport:
    welfare: Fraction
    target: Fraction
    items: int
    floor_holds: Optional[bool]
    records: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.holds for r in self.records) and self.floor_holds is not False


@dataclass
class RevenueReport:
    revenue: Fraction
    v_star: Fraction
    k: int
    skipped: bool
    event_probability: Optional[Fraction]
    records: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.skipped or all(r.holds for r in self.records)


def _welfare_of(outcome) -> Fraction:
    """Exact welfare, or the lower confidence bound of a Monte Carlo estimate."""
    if isinstance(outcome, (int, Fraction)):
        return Fraction(outcome)
    lcb = getattr(outcome, "welfare_lcb", None)
    return Fraction(lcb) if lcb is not None else Fraction(outcome.welfare)


def efficiency_check(outcome, truth, deltas: Iterable = DEFAULT_DELTAS, m: int = 1) -> EfficiencyReport:
    """Single unit: eps = 1/(2 delta) against the top value, plus E[W] >= v_max^2 / 2.
    Multi unit: eps = e / (2 (e-1) delta) against the sum of the top m values."""
    values = sorted((Fraction(v) for v in truth.values()), reverse=True)
    w = _welfare_of(outcome)
    if m == 1:
        target = values[0] if values else ZERO
        floor = w >= target * target / 2
    else:
        target = sum(values[:m], ZERO)
        floor = None
    recs = []
    for d in deltas:
        d = Fraction(d)
        if not 0 < d < 1:
            raise ValueError("deltas must lie in (0, 1)")
        eps = 1 / (2 * d) if m == 1 else E_UPPER / (2 * (E_UPPER - 1) * d)
        recs.append(BoundRecord(d, eps, eps * w + m * d, target))
    return EfficiencyReport(w, target, m, floor, recs)


def conditional_event_probability(net: SocialNetwork, profile: ReportProfile, heads) -> Fraction:
    """Probability that the realised head is not critical for the top bidder
    (smallest id among ties).  ``heads`` yields ``(head, probability)`` pairs."""
    bids = profile.bids()
    part = participation_closure(net, profile)
    top = max(bids[x] for x in part)
    star = min(x for x in part if bids[x] == top)
    critical = {h for h in part if star in critical_descendants(net, profile, h)}
    return sum((p for h, p in heads if h not in critical), ZERO)


def revenue_check(outcome, truth, deltas: Iterable = DEFAULT_DELTAS, k: int = 1,
                  event_probability: Optional[Fraction] = None) -> RevenueReport:
    v_star = max((Fraction(v) for v in truth.values()), default=ZERO)
    rev = Fraction(outcome.revenue)
    if k < 2:
        return RevenueReport(rev, v_star, k, True, event_probability,
                             notes=["seller degree below 2: corollary bound not applicable"])
    recs = []
    for d in deltas:
        d = Fraction(d)
        eps = Fraction(k, 2 * (k - 1)) / d
        recs.append(BoundRecord(d, eps, eps * rev + d, v_star))
    notes = []
    if event_probability is not None and event_probability < 1:
        notes.append(f"head is critical for the top bidder with probability {1 - event_probability}")
    return RevenueReport(rev, v_star, k, False, event_probability, recs, notes)

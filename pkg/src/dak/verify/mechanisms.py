"""Uniform handles on every mechanism the oracles can audit."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from ..engine import Case, Lottery, surcharge_of
from ..fpdm import ExpectedOutcome, SurchargeVariant, fpdm_lottery, outcome_from_lottery
from ..graph import (SocialNetwork, ReportProfile, TrueProfile, critical_descendants,
                     participation_closure, removed_without, reported_edges)
from ..maps import BreadthFirst, GeneralizedBreadthFirst, WeightedGBF, enumerate_distribution
from ..mupdm import multi_outcome, mupdm_lottery, spmupdm_lottery
from ..pdm import PathInstance, pdm_expected_stats

ZERO = Fraction(0)


def _always(net, profile) -> bool:
    return True


@dataclass(frozen=True)
class MechanismUnderTest:
    """``evaluate(net, profile, truth)`` returns an outcome with ``utility``,
    ``win_probability``, ``payment``, ``welfare``, ``revenue`` and ``items``.

    ``lottery(net, profile)`` is set when the mechanism is a lottery over
    PDM paths with head surcharges; the oracles then use the batched integer
    evaluator.  ``admits`` restricts the reported structures the mechanism is
    defined on (PDM needs a path).
    """
    label: str
    evaluate: Callable
    lottery: Optional[Callable] = None
    exact: bool = True
    admits: Callable = _always
    items: int = 1


def path_order(net: SocialNetwork, profile: ReportProfile) -> Optional[tuple]:
    """The participants in path order if the reported graph is a simple path."""
    part = participation_closure(net, profile)
    heads = [i for i in part if i in net.seller_neighbors]
    if len(heads) != 1:
        return None
    succ: dict = {}
    for a, b in reported_edges(net, profile):
        succ.setdefault(a, []).append(b)
    order = [heads[0]]
    while succ.get(order[-1]):
        nxt = succ[order[-1]]
        if len(nxt) != 1 or nxt[0] in order:
            return None
        order.append(nxt[0])
    if len(order) != len(part) or any(len(v) > 1 for v in succ.values()):
        return None
    indeg: dict = {}
    for _, b in reported_edges(net, profile):
        indeg[b] = indeg.get(b, 0) + 1
    if any(c > 1 for c in indeg.values()) or indeg.get(order[0], 0):
        return None
    return tuple(order)


def pdm_lottery(net: SocialNetwork, profile: ReportProfile) -> Lottery:
    order = path_order(net, profile)
    if order is None:
        raise ValueError("PDM needs the reported graph to be a path")
    return Lottery((Case((order,), (frozenset(),), Fraction(1)),), 1)


def _lottery_mechanism(label, make, items=1, admits=_always) -> MechanismUnderTest:
    def run(net, profile, truth):
        return outcome_from_lottery(make(net, profile), profile, truth, net.nodes) if items == 1 \
            else multi_outcome(make(net, profile), profile, truth, net.nodes)
    return MechanismUnderTest(label, run, make, True, admits, items)


# --------------------------------------------------------------------------
# strawman: f-PDM run m times, earlier winners stay on as bidless relays

def repeated_fpdm(net: SocialNetwork, profile: ReportProfile, truth: TrueProfile, m: int) -> ExpectedOutcome:
    nodes = sorted(net.nodes)
    bids = profile.bids()
    dist = enumerate_distribution(BreadthFirst(), net, profile)
    part = participation_closure(net, profile)
    memo: dict = {}

    def rounds(done: frozenset, left: int):
        if left == 0 or len(done) == len(part):
            return {}, {}, ZERO, ZERO
        if (done, left) in memo:
            return memo[(done, left)]
        win: dict = {}
        util: dict = {}
        welfare = revenue = ZERO
        for order, p in dist:
            path = tuple(x for x in order if x not in done)
            head = path[0]
            base = removed_without(net, profile, head) - done
            sur = surcharge_of(base, bids)
            inst = PathInstance([bids[x] for x in path], [truth[x] for x in path])
            st = pdm_expected_stats(inst)
            for pos, x in enumerate(path):
                win[x] = win.get(x, ZERO) + p * st.win_probability[pos]
                util[x] = util.get(x, ZERO) + p * (st.utility[pos] - (sur if pos == 0 else ZERO))
            welfare += p * st.welfare
            revenue += p * sur
            for pos, x in enumerate(path):
                q = p * st.win_probability[pos]
                if q:
                    w2, u2, wf2, r2 = rounds(done | {x}, left - 1)
                    for y, a in w2.items():
                        win[y] = win.get(y, ZERO) + q * a
                    for y, a in u2.items():
                        util[y] = util.get(y, ZERO) + q * a
                    welfare += q * wf2
                    revenue += q * r2
        memo[(done, left)] = (win, util, welfare, revenue)
        return memo[(done, left)]

    win, util, welfare, revenue = rounds(frozenset(), m)
    win = {i: win.get(i, ZERO) for i in nodes}
    util = {i: util.get(i, ZERO) for i in nodes}
    pay = {i: win[i] * truth[i] - util[i] for i in nodes}
    return ExpectedOutcome(win, util, pay, welfare, revenue, items=m)


# --------------------------------------------------------------------------
# IDM-style stub (non-normative): only what the figures attribute to IDM

def idm_stub(net: SocialNetwork, profile: ReportProfile, truth: TrueProfile) -> ExpectedOutcome:
    nodes = sorted(net.nodes)
    part = participation_closure(net, profile)
    bids = profile.bids()
    win = {i: ZERO for i in nodes}
    pay = {i: ZERO for i in nodes}
    if part:
        top = max(bids[x] for x in part)
        wstar = min(x for x in part if bids[x] == top)
        chain = [x for x in part if wstar in critical_descendants(net, profile, x)]
        chain.sort(key=lambda x: -len(critical_descendants(net, profile, x)))

        def vstar_without(x):
            return max((bids[y] for y in removed_without(net, profile, x)), default=ZERO)

        winner = wstar
        for idx, d in enumerate(chain[:-1]):
            if bids[d] == vstar_without(chain[idx + 1]):
                winner = d
                break
        win[winner] = Fraction(1)
        pay[winner] = vstar_without(winner)
        for idx in range(chain.index(winner)):
            d, nxt = chain[idx], chain[idx + 1]
            pay[d] = vstar_without(d) - vstar_without(nxt)
    util = {i: win[i] * truth[i] - pay[i] for i in nodes}
    welfare = sum((win[i] * truth[i] for i in nodes), ZERO)
    revenue = sum(pay.values(), ZERO)
    return ExpectedOutcome(win, util, pay, welfare, revenue)


# --------------------------------------------------------------------------

MECHANISMS = ("pdm", "fpdm-bf", "fpdm-gbf", "fpdm-wgbf", "fpdm-bf-cp", "mupdm", "spmupdm",
              "repeated-fpdm-strawman", "idm-stub")
EXACT_ONLY = ("repeated-fpdm-strawman", "idm-stub")


def make_mechanism(name: str, items: int = 1, cap: Optional[int] = None) -> MechanismUnderTest:
    if name == "pdm":
        return _lottery_mechanism("pdm", pdm_lottery,
                                  admits=lambda net, prof: path_order(net, prof) is not None)
    if name.startswith("fpdm-"):
        kinds = {"fpdm-bf": (BreadthFirst(), SurchargeVariant.STANDARD),
                 "fpdm-gbf": (GeneralizedBreadthFirst(), SurchargeVariant.STANDARD),
                 "fpdm-wgbf": (WeightedGBF(), SurchargeVariant.STANDARD),
                 "fpdm-bf-cp": (BreadthFirst(), SurchargeVariant.COLLUSION_PROOF)}
        if name not in kinds:
            raise ValueError(f"unknown mechanism {name!r}")
        kind, variant = kinds[name]
        return _lottery_mechanism(name, lambda net, prof: fpdm_lottery(net, prof, kind, variant, cap))
    if name == "mupdm":
        return _lottery_mechanism(name, lambda net, prof: mupdm_lottery(net, prof, items, cap), items)
    if name == "spmupdm":
        return _lottery_mechanism(name, lambda net, prof: spmupdm_lottery(net, prof, items, cap), items)
    if name == "repeated-fpdm-strawman":
        return MechanismUnderTest(name, lambda net, prof, truth: repeated_fpdm(net, prof, truth, items),
                                  items=items)
    if name == "idm-stub":
        return MechanismUnderTest(name, idm_stub)
    raise ValueError(f"unknown mechanism {name!r}; choose from {', '.join(MECHANISMS)}")

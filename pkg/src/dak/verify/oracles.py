"""Brute-force deviation oracles (IC, Sybil, collusion) and the basic audit.

Every oracle works in two layers.  The *structure* of a deviation (who is
absent, who invites whom, how Sybil identities are wired) fixes the lottery
over paths; the bids only enter when the lottery is evaluated.  So each
distinct reported structure is enumerated once and all bid combinations for
it are evaluated in one integer batch.  Candidate bids for a deviating
identity are the grid, the identity's true value, the other participants'
bids and the endpoints 0 and 1.  For a single deviator this list is
complete: its expected utility is continuous and piecewise concave-quadratic
in its own bid with breakpoints at the other bids and the peak of every piece
at its true value, so the supremum sits on a candidate.

A profitable deviation is always re-evaluated through the mechanism's exact
``Fraction`` route before it is reported.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from ..engine import BatchEvaluator, common_scale
from ..graph import (SocialNetwork, Report, ReportProfile, TrueProfile, participation_closure,
                     reported_edges)
from .mechanisms import MechanismUnderTest

ZERO = Fraction(0)
DEFAULT_STEP = Fraction(1, 8)
_CHUNK_CELLS = 2_000_000


@dataclass(frozen=True)
class Witness:
    deviators: tuple
    net: SocialNetwork
    profile: ReportProfile      # the full deviated report profile
    truth: TrueProfile
    baseline: Fraction
    deviated: Fraction

    @property
    def gain(self) -> Fraction:
        return self.deviated - self.baseline

    @property
    def reports(self) -> dict:
        return {i: self.profile[i] for i in self.deviators}


@dataclass
class DeviationReport:
    mechanism: str
    suite: str
    verdict: str                # "pass" or "fail"
    max_gain: Fraction
    witness: Optional[Witness] = None
    structures: int = 0
    profiles: int = 0
    skipped: int = 0
    per_group: dict = field(default_factory=dict)   # deviator group -> best gain
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


@dataclass
class BasicAudit:
    feasible: bool
    ir: dict
    wbb: bool
    problems: list

    @property
    def passed(self) -> bool:
        return self.feasible and self.wbb and all(self.ir.values())


def audit_basic(outcome, truth: TrueProfile, profile: Optional[ReportProfile] = None,
                items: Optional[int] = None) -> BasicAudit:
    items = getattr(outcome, "items", 1) if items is None else items
    problems = []
    pis = outcome.win_probability
    feasible = True
    for i, p in sorted(pis.items()):
        if not 0 <= p <= 1:
            feasible = False
            problems.append(f"buyer {i}: win probability {p} outside [0, 1]")
    total = sum(pis.values(), ZERO)
    if total > items:
        feasible = False
        problems.append(f"win probabilities sum to {total} > {items}")
    if profile is not None:
        for i in sorted(profile):
            if profile[i] is None and (pis.get(i, ZERO) != 0 or outcome.payment.get(i, ZERO) != 0):
                feasible = False
                problems.append(f"absent buyer {i} is allocated or charged")
    ir = {i: u >= 0 for i, u in sorted(outcome.utility.items())}
    for i, ok in ir.items():
        if not ok:
            problems.append(f"buyer {i}: negative expected utility {outcome.utility[i]}")
    wbb = outcome.revenue >= 0
    if not wbb:
        problems.append(f"negative expected revenue {outcome.revenue}")
    return BasicAudit(feasible, ir, wbb, problems)


# --------------------------------------------------------------------------
# shared search machinery

def grid(step: Fraction) -> list:
    step = Fraction(step)
    if step <= 0 or step > 1 or (1 / step).denominator != 1:
        raise ValueError("grid step must divide 1")
    count = int(1 / step)
    return [step * k for k in range(count + 1)]


def subsets(items: Iterable) -> list:
    items = sorted(items)
    return [frozenset(c) for r in range(len(items) + 1) for c in itertools.combinations(items, r)]


class _Search:
    def __init__(self, mech: MechanismUnderTest, suite: str, step: Fraction):
        self.mech = mech
        self.step = Fraction(step)
        self.grid = grid(self.step)
        self.report = DeviationReport(mech.label, suite, "pass", None)
        self.seen: set = set()
        self._lotteries: dict = {}

    def candidates(self, own_value: Fraction, profile: ReportProfile, deviators) -> list:
        others = {r.bid for i, r in profile.items() if r is not None and i not in deviators}
        return sorted(set(self.grid) | {ZERO, Fraction(1), own_value} | others)

    def consider(self, net: SocialNetwork, template: ReportProfile, truth: TrueProfile,
                 deviators: Sequence[int], values: dict, baseline: Fraction, group=None) -> None:
        """Search every bid combination for one deviation structure."""
        part = participation_closure(net, template)
        key = (frozenset(part), reported_edges(net, template), tuple(deviators),
               tuple(sorted((i, values[i]) for i in deviators)), baseline)
        if key in self.seen:
            return
        self.seen.add(key)
        if not part or not self.mech.admits(net, template):
            self.report.skipped += 1
            return
        self.report.structures += 1
        active = [i for i in deviators if i in part]
        cands = [self.candidates(values[i], template, deviators) for i in active]
        if self.mech.lottery is not None:
            best, bids = self._batched(net, template, truth, deviators, active, cands)
        else:
            best, bids = self._direct(net, template, truth, deviators, active, cands)
        gain = best - baseline
        group = tuple(deviators) if group is None else group
        if group not in self.report.per_group or gain > self.report.per_group[group]:
            self.report.per_group[group] = gain
        if self.report.max_gain is None or gain > self.report.max_gain:
            prof = template.replace({i: Report(b, template[i].invited) for i, b in bids.items()})
            self.report.max_gain = gain
            self.report.witness = Witness(tuple(deviators), net, prof, truth, baseline, best)

    def _direct(self, net, template, truth, deviators, active, cands):
        best = None
        best_bids = {}
        for combo in itertools.product(*cands):
            prof = template.replace({i: Report(b, template[i].invited) for i, b in zip(active, combo)})
            out = self.mech.evaluate(net, prof, truth)
            total = sum((out.utility[i] for i in deviators), ZERO)
            self.report.profiles += 1
            if best is None or total > best:
                best, best_bids = total, dict(zip(active, combo))
        return best, best_bids

    def _batched(self, net, template, truth, deviators, active, cands):
        key = (net, tuple(sorted((i, None if r is None else r.invited) for i, r in template.items())))
        if key not in self._lotteries:
            lot = self.mech.lottery(net, template)
            self._lotteries = {key: BatchEvaluator(lot, sorted(net.nodes))}  # keep one at a time
        ev = self._lotteries[key]
        cols = ev.columns
        bids = template.bids()
        D = common_scale(list(bids.values()) + [truth[i] for i in cols] + [b for c in cands for b in c])
        base_row = np.array([int(bids.get(i, ZERO) * D) for i in cols], dtype=object)
        values = np.array([int(truth[i] * D) for i in cols], dtype=object)
        pos = [ev.col[i] for i in active]
        dev_cols = [ev.col[i] for i in deviators]
        grids = [np.array([int(b * D) for b in c], dtype=object) for c in cands]
        total_rows = int(np.prod([len(c) for c in cands])) if cands else 1
        cells = max(1, sum(idx.shape[0] * idx.shape[1] for idx, _, _, _ in ev.groups))
        chunk = max(1, _CHUNK_CELLS // cells)
        best_val = None
        best_idx = 0
        scale = None
        for start in range(0, total_rows, chunk):
            stop = min(total_rows, start + chunk)
            rows = np.tile(base_row, (stop - start, 1))
            flat = np.arange(start, stop)
            for k in reversed(range(len(pos))):
                n_k = len(grids[k])
                rows[:, pos[k]] = grids[k][flat % n_k]
                flat = flat // n_k
            res = ev.run(rows, values, D)
            scale = res["money_scale"]
            cluster = res["utility"][:, dev_cols].sum(axis=1)
            j = int(np.argmax(cluster))
            if best_val is None or cluster[j] > best_val:
                best_val, best_idx = cluster[j], start + j
        self.report.profiles += total_rows
        combo = []
        flat = best_idx
        for k in reversed(range(len(pos))):
            combo.append(cands[k][flat % len(cands[k])])
            flat //= len(cands[k])
        combo.reverse()
        return Fraction(int(best_val), scale), dict(zip(active, combo))

    def finish(self) -> DeviationReport:
        rep = self.report
        if rep.max_gain is None:
            rep.max_gain = ZERO
        if rep.max_gain > 0:
            w = rep.witness
            out = self.mech.evaluate(w.net, w.profile, w.truth)
            replayed = sum((out.utility[i] for i in w.deviators), ZERO)
            if replayed != w.deviated:
                raise AssertionError(f"batched and exact evaluation disagree: {w.deviated} vs {replayed}")
            rep.verdict = "fail"
        return rep


def _truthful_on(net: SocialNetwork, truth: TrueProfile) -> ReportProfile:
    return ReportProfile.truthful(net, truth)


# --------------------------------------------------------------------------

def ic_oracle(net: SocialNetwork, truth: TrueProfile, mech: MechanismUnderTest,
              bid_grid_step: Fraction = DEFAULT_STEP, buyers: Optional[Iterable[int]] = None) -> DeviationReport:
    """Every buyer, every invited subset (or absence), every candidate bid."""
    search = _Search(mech, "ic", bid_grid_step)
    truthful = _truthful_on(net, truth)
    base = mech.evaluate(net, truthful, truth)
    for i in sorted(net.nodes if buyers is None else buyers):
        baseline = base.utility[i]
        for sub in subsets(net.out_neighbors(i)):
            template = truthful.replace({i: Report(truth[i], sub)})
            search.consider(net, template, truth, [i], {i: truth[i]}, baseline)
        search.consider(net, truthful.replace({i: None}), truth, [i], {i: truth[i]}, baseline)
    return search.finish()


def sybil_structures(net: SocialNetwork, attacker: int, count: int):
    """Distinct Sybil wirings with exactly ``count`` reachable Sybil identities.

    Yields ``(deviated network, invitation map, sybil ids)``.  Identities may
    only invite the attacker's true neighbours or each other; nobody outside
    points at a Sybil.  Edges back to the attacker are left out since they
    cannot change who is reachable or critical.  Wirings equal up to a
    relabelling of the Sybils are yielded once.
    """
    first = max(net.nodes) + 1
    sybils = list(range(first, first + count))
    targets = sorted(net.out_neighbors(attacker)) + sybils
    seen = set()
    per_sybil = [subsets([t for t in targets if t != s]) for s in sybils]
    for mine in subsets(targets):
        for theirs in itertools.product(*per_sybil):
            inv = {attacker: mine, **dict(zip(sybils, theirs))}
            reach = set()
            stack = [attacker]
            while stack:
                u = stack.pop()
                for v in inv.get(u, ()):
                    if v in inv and v not in reach and v != attacker:
                        reach.add(v)
                        stack.append(v)
            if reach != set(sybils):
                continue
            canon = min(
                tuple(sorted((perm.get(u, u), perm.get(v, v)) for u, vs in inv.items() for v in vs))
                for perm in (dict(zip(sybils, p)) for p in itertools.permutations(sybils)))
            if canon in seen:
                continue
            seen.add(canon)
            edges = [(u, v) for u, vs in inv.items() for v in vs if u != attacker or v in sybils]
            yield net.with_edges(edges, sybils), inv, sybils


def sybil_oracle(net: SocialNetwork, truth: TrueProfile, mech: MechanismUnderTest,
                 max_sybils: int = 2, bid_grid_step: Fraction = DEFAULT_STEP,
                 attackers: Optional[Iterable[int]] = None) -> DeviationReport:
    search = _Search(mech, "sybil", bid_grid_step)
    truthful = _truthful_on(net, truth)
    base = mech.evaluate(net, truthful, truth)
    for i in sorted(net.nodes if attackers is None else attackers):
        baseline = base.utility[i]
        v = truth[i]
        for count in range(1, max_sybils + 1):
            for dev_net, inv, sybils in sybil_structures(net, i, count):
                dev_truth = truth.with_values({s: v for s in sybils})
                template = truthful.replace({x: Report(v, inv[x]) for x in [i] + sybils}, net=dev_net)
                search.consider(dev_net, template, dev_truth, [i] + sybils,
                                {x: v for x in [i] + sybils}, baseline, group=(i,))
    return search.finish()


def connected_cartels(net: SocialNetwork, max_size: int) -> list:
    """Buyer sets inducing a weakly connected subgraph, smallest first."""
    out = []
    nodes = sorted(net.nodes)
    for r in range(1, max_size + 1):
        for combo in itertools.combinations(nodes, r):
            c = set(combo)
            adj = {u: {v for v in c if (u, v) in net.edges or (v, u) in net.edges} for u in c}
            seen = {combo[0]}
            stack = [combo[0]]
            while stack:
                u = stack.pop()
                for v in adj[u] - seen:
                    seen.add(v)
                    stack.append(v)
            if seen == c:
                out.append(frozenset(c))
    return out


def collusion_oracle(net: SocialNetwork, truth: TrueProfile, mech: MechanismUnderTest,
                     max_cartel: int = 3, bid_grid_step: Fraction = DEFAULT_STEP,
                     common_values: Optional[Iterable] = None,
                     cartels: Optional[Iterable[Iterable[int]]] = None) -> DeviationReport:
    """Joint deviations of connected cartels sharing a common true value.

    Each member may bid anything on the candidate list, invite any subset of
    its neighbours and the other members, or stay away.  ``common_values``
    defaults to the bid grid; pass the instance's own values to keep them.
    """
    search = _Search(mech, "cp", bid_grid_step)
    values = search.grid if common_values is None else [Fraction(c) for c in common_values]
    groups = connected_cartels(net, max_cartel) if cartels is None else [frozenset(c) for c in cartels]
    for cartel in groups:
        members = sorted(cartel)
        options = []
        for j in members:
            allowed = set(net.out_neighbors(j)) | (cartel - {j})
            options.append([None] + subsets(allowed))
        scenarios = []
        for c in values:
            t = truth.with_values({j: c for j in members})
            truthful = _truthful_on(net, t)
            base = mech.evaluate(net, truthful, t)
            scenarios.append((c, t, truthful, sum((base.utility[j] for j in members), ZERO)))
        for combo in itertools.product(*options):
            extra = [(j, x) for j, inv in zip(members, combo) if inv is not None
                     for x in inv if x not in net.out_neighbors(j)]
            dev_net = net.with_edges(extra) if extra else net
            for c, t, truthful, baseline in scenarios:
                template = truthful.replace(
                    {j: (None if inv is None else Report(c, inv)) for j, inv in zip(members, combo)},
                    net=dev_net)
                search.consider(dev_net, template, t, members, {j: c for j in members}, baseline)
    return search.finish()

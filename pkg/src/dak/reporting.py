"""Run reports: exact outcomes as fraction strings, Monte Carlo as estimates."""
from __future__ import annotations

import csv
import io
from fractions import Fraction

from .engine import evaluate
from .graph import ReportProfile, participation_closure
from .montecarlo import Estimate, simulate
from .scenario import Scenario, ScenarioError
from .verify.bounds import efficiency_check
from .verify.mechanisms import make_mechanism
from .verify.oracles import audit_basic


def q(x: Fraction) -> str:
    return str(Fraction(x))


def est(e: Estimate) -> dict:
    return {"mean": e.mean, "ci99": [e.lcb, e.ucb]}


def exact_outcome(s: Scenario):
    """``(outcome, breakdown cases or None)`` for the scenario's mechanism."""
    net, truth = s.network(), s.truth()
    profile = ReportProfile.truthful(net, truth)
    mech = make_mechanism(s.mechanism, s.items)
    if not mech.admits(net, profile):
        raise ScenarioError(f"mechanism: {s.mechanism} is not defined on this network (it needs a path)")
    if mech.lottery is None:
        return mech.evaluate(net, profile, truth), None
    lot = mech.lottery(net, profile)
    agg = evaluate(lot, profile.bids(), truth, net.nodes)
    agg.items = lot.items
    return agg, agg.cases


def run_report(s: Scenario) -> dict:
    net, truth = s.network(), s.truth()
    profile = ReportProfile.truthful(net, truth)
    head = {"scenario": s.digest(), "mechanism": s.mechanism, "mode": s.mode, "items": s.items,
            "participants": [s.name(i) for i in participation_closure(net, profile)]}
    if s.mode == "mc":
        res = simulate(s.mechanism, net, profile, truth, s.items, s.samples, s.seed)
        head.update({
            "seed": s.seed, "samples": s.samples,
            "buyers": {str(s.name(i)): {"win_probability": est(res.win[i]), "utility": est(res.utility[i])}
                       for i in sorted(net.nodes)},
            "welfare": est(res.welfare), "revenue": est(res.revenue)})
        return head
    out, cases = exact_outcome(s)
    audit = audit_basic(out, truth, profile, s.items)
    eff = efficiency_check(out, truth, m=s.items)
    head.update({
        "buyers": {str(s.name(i)): {"win_probability": q(out.win_probability[i]),
                                    "utility": q(out.utility[i]), "payment": q(out.payment[i])}
                   for i in sorted(net.nodes)},
        "welfare": q(out.welfare), "revenue": q(out.revenue)})
    if hasattr(out, "gross_payments"):
        head["gross_payments"] = q(out.gross_payments)
        head["gross_rewards"] = q(out.gross_rewards)
    head["audit"] = {"feasible": audit.feasible, "ir": all(audit.ir.values()), "wbb": audit.wbb,
                     "efficiency": eff.passed, "problems": audit.problems}
    if cases is not None:
        head["breakdown"] = [
            {"paths": [[s.name(x) for x in p.path] for p in c.paths],
             "probability": q(c.case.probability),
             "surcharges": [q(p.surcharge) for p in c.paths],
             "welfare": q(c.welfare), "revenue": q(c.revenue)}
            for c in cases]
    return head


def breakdown_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case", "probability", "paths", "surcharges", "welfare", "revenue"])
    for k, row in enumerate(report.get("breakdown", [])):
        w.writerow([k, row["probability"], " | ".join(" ".join(map(str, p)) for p in row["paths"]),
                    " ".join(row["surcharges"]), row["welfare"], row["revenue"]])
    return buf.getvalue()

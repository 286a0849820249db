"""Acceptance gates.  Each test prints one PASS/FAIL line and asserts it.

Run ``python3 tests/test_acceptance.py`` to see only these lines.
"""
import subprocess
import sys
import time
import timeit
from fractions import Fraction as F

import numpy as np
import pytest

from dak.fpdm import SurchargeVariant, fpdm_expected
from dak.generate import generate
from dak.graph import SELLER, Report, ReportProfile, SocialNetwork, TrueProfile, dominator_tree
from dak.maps import (BreadthFirst, GeneralizedBreadthFirst, WeightedGBF, enumerate_distribution,
                      prefix_set_masses)
from dak.montecarlo import fast_multi_welfare
from dak.mupdm import mupdm_expected, spmupdm_expected, spmupdm_map
from dak.pdm import PathInstance, pdm_allocation, pdm_expected_stats, pdm_payment_matrix
from dak.verify.bounds import efficiency_check
from dak.verify.mechanisms import idm_stub, make_mechanism, repeated_fpdm
from dak.verify.oracles import (audit_basic, collusion_oracle, ic_oracle, subsets, sybil_oracle,
                                sybil_structures)
from conftest import Fig, random_instances
from refs import all_connected_networks, all_layered_dags, brute_dominators, fig7_hand

STEP = F(1, 8)
COARSE = F(1, 4)
CP = SurchargeVariant.COLLUSION_PROOF


@pytest.fixture
def criterion(capsys):
    def report(name, ok, detail=""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'}: {name}" + (f" ({detail})" if detail else ""))
        assert ok, detail
    return report


def suite_instances():
    """100 seeded connected instances with n <= 5; every fourth is a path."""
    out = []
    for k, (net, truth) in enumerate(random_instances(100, seed=2025, sizes=(2, 3, 4, 5))):
        out.append((net, truth, 1 + k % 3))
    return out


SUITE = suite_instances()


def single_unit_outcomes(net, truth, prof):
    yield "fpdm-bf", fpdm_expected(net, prof, truth)
    yield "fpdm-gbf", fpdm_expected(net, prof, truth, GeneralizedBreadthFirst())
    yield "fpdm-wgbf", fpdm_expected(net, prof, truth, WeightedGBF())
    yield "fpdm-bf-cp", fpdm_expected(net, prof, truth, BreadthFirst(), CP)


# --------------------------------------------------------------------------

def test_fig1_reproduction(criterion):
    inst = PathInstance.truthful([F("0.2"), F("0.1"), F("0.4"), F(1)])
    st = pdm_expected_stats(inst)
    pay = pdm_payment_matrix(inst)
    best = min(timeit.repeat(lambda: pdm_expected_stats(inst), number=100, repeat=5)) / 100
    ok = (pdm_allocation(inst) == (F(1, 5), 0, F(1, 5), F(3, 5))
          and (pay[2][2], pay[3][3]) == (F(3, 10), F(7, 10))
          and (pay[0][2], pay[0][3]) == (-F(3, 10), -F(7, 10))
          and st.welfare == F(18, 25) and st.revenue == 0 and best < 1e-3)
    criterion("Fig. 1 reproduction", ok, f"E[W]={st.welfare}, revenue={st.revenue}, {best * 1e6:.0f} us")


def test_fig2_reproduction(criterion):
    f = Fig("fig2")
    name = {v: k for k, v in f.id.items()}
    bf = {"".join(name[x] for x in o): p for o, p in enumerate_distribution(BreadthFirst(), f.net, f.profile)}
    gbf = {"".join(name[x] for x in o): p
           for o, p in enumerate_distribution(GeneralizedBreadthFirst(), f.net, f.profile)}
    out = fpdm_expected(f.net, f.profile, f.truth, GeneralizedBreadthFirst())
    cases = {"".join(name[x] for x in c.ordering): (c.stats.welfare, c.stats.revenue + c.surcharge)
             for c in out.breakdown}
    ok = (bf == {"abc": F(1, 2), "bac": F(1, 2)}
          and gbf == {"abc": F(1, 4), "acb": F(1, 4), "bac": F(1, 2)}
          and cases == {"abc": (F("0.66"), 0), "acb": (F("0.66"), 0), "bac": (F("0.63"), F("0.405"))})
    shown = ", ".join(f"{k}: W={w} rev={r}" for k, (w, r) in sorted(cases.items()))
    criterion("Fig. 2/3 reproduction", ok, shown)


def test_fig5_reproduction(criterion):
    f = Fig("fig5")
    a, b = f.id["a"], f.id["b"]
    out = fpdm_expected(f.net, f.profile, f.truth)
    ok = (out.win_probability[b] == 1 and out.payment[b] == F(1, 2) and out.payment[a] == -F(1, 2)
          and out.welfare == 1)
    criterion("Fig. 5 reproduction", ok, f"charge={out.payment[b]}, reward={-out.payment[a]}")


def test_fig7_reproduction(criterion):
    f = Fig("fig7")
    case1, case2, total = fig7_hand()
    out = mupdm_expected(f.net, f.profile, f.truth, 2)
    got = sorted((c.welfare, c.revenue) for c in out.breakdown)
    ok = (total == (F("0.885"), F("0.2025")) and got == sorted([case1, case2])
          and (out.welfare, out.revenue) == total)
    shown = ", ".join(f"W={w} rev={r}" for w, r in got)
    criterion("Fig. 7 reproduction", ok, f"{shown}; aggregate W={out.welfare} rev={out.revenue}")


def test_fig8_reproduction(criterion):
    f = Fig("fig8")
    a, b, c, d, e = (f.id[x] for x in "abcde")
    out = spmupdm_expected(f.net, f.profile, f.truth, 2)
    rng = np.random.default_rng(0)
    maps = {tuple(sorted(spmupdm_map(f.net, f.profile, 2, rng).paths)) for _ in range(100)}
    ok = (maps == {((a, c, d), (b, e))} and len(out.breakdown) == 1
          and out.welfare == F("0.41") and out.revenue == 0)
    criterion("Fig. 8/9 reproduction", ok, f"E[W]={out.welfare}, revenue={out.revenue}")


def test_property_suite(criterion):
    start = time.perf_counter()
    violations = []
    checked = 0
    for idx, (net, truth, m) in enumerate(SUITE):
        prof = ReportProfile.truthful(net, truth)
        outs = list(single_unit_outcomes(net, truth, prof))
        if make_mechanism("pdm").admits(net, prof):
            outs.append(("pdm", make_mechanism("pdm").evaluate(net, prof, truth)))
        outs.append((f"mupdm m={m}", mupdm_expected(net, prof, truth, m)))
        outs.append((f"spmupdm m={m}", spmupdm_expected(net, prof, truth, m)))
        for label, out in outs:
            items = getattr(out, "items", 1)
            k = min(items, len(net.seller_neighbors))
            audit = audit_basic(out, truth, prof)
            checked += 1
            if not audit.passed or sum(out.win_probability.values()) != k:
                violations.append((idx, label, audit.problems))
    elapsed = time.perf_counter() - start
    criterion("Property suite: feasibility, IR, WBB", not violations and elapsed < 600,
              f"{checked} outcomes on {len(SUITE)} instances, {len(violations)} violations, {elapsed:.1f}s")


def test_ic_oracle(criterion):
    start = time.perf_counter()
    failures = []
    for idx, (net, truth, m) in enumerate(SUITE):
        names = ["fpdm-bf", "fpdm-gbf", "fpdm-wgbf", "fpdm-bf-cp"]
        mechs = [make_mechanism(x) for x in names] + [make_mechanism("mupdm", m), make_mechanism("spmupdm", m)]
        for mech in mechs:
            rep = ic_oracle(net, truth, mech, STEP)
            if not rep.passed:
                failures.append((idx, mech.label, rep.max_gain))
    # the repeated single-unit strawman on the two-item counterexample family
    family = []
    for vb in (F(0), F(1, 10), F(1, 8), F(1, 4)):
        net = SocialNetwork(range(3), [(0, 1), (1, 0), (0, 2)], [0, 1])
        truth = TrueProfile({0: 1, 1: vb, 2: 1})
        rep = ic_oracle(net, truth, make_mechanism("repeated-fpdm-strawman", 2), STEP)
        prof = ReportProfile.truthful(net, truth)
        honest = repeated_fpdm(net, prof, truth, 2).utility[0]
        under = max(repeated_fpdm(net, prof.replace({0: Report(b, {1, 2})}), truth, 2).utility[0]
                    for b in (x * STEP for x in range(8)))
        family.append((vb, rep.passed, under > honest))
    strawman_fails = all(not passed and underbid for _, passed, underbid in family)
    net = SocialNetwork(range(3), [(0, 1), (1, 0), (0, 2)], [0, 1])
    truth = TrueProfile({0: 1, 1: 0, 2: 1})
    prof = ReportProfile.truthful(net, truth)
    worked = (repeated_fpdm(net, prof, truth, 2).utility[0],
              repeated_fpdm(net, prof.replace({0: Report(F(1, 2), {1, 2})}), truth, 2).utility[0])
    ok = not failures and strawman_fails and worked == (F(3, 4), F(31, 32))
    criterion("IC oracle: f-PDM/MUPDM/SP-MUPDM pass, strawman fails", ok,
              f"{len(failures)} failures on the suite; strawman underbid 3/4 -> {worked[1]}; "
              f"{time.perf_counter() - start:.1f}s")


def test_sp_oracle(criterion):
    start = time.perf_counter()
    bad = []
    f1 = Fig("fig1")
    if not sybil_oracle(f1.net, f1.truth, make_mechanism("pdm"), 2, STEP).passed:
        bad.append("pdm fig1")
    f8 = Fig("fig8")
    if not sybil_oracle(f8.net, f8.truth, make_mechanism("spmupdm", 2), 2, STEP).passed:
        bad.append("spmupdm fig8")
    rng = np.random.default_rng(77)
    for k in range(20):
        net, truth = generate("path", int(rng.integers(2, 5)), rng)
        if k < 10 and not sybil_oracle(net, truth, make_mechanism("pdm"), 2, COARSE).passed:
            bad.append(f"pdm path {k}")
        net, truth = generate(("tree", "gnp-connected", "layered")[k % 3], int(rng.integers(3, 5)), rng)
        m = 1 + k % 2
        if not sybil_oracle(net, truth, make_mechanism("spmupdm", m), 2, COARSE).passed:
            bad.append(f"spmupdm random {k}")
    mup = sybil_oracle(f8.net, f8.truth, make_mechanism("mupdm", 2), 2, STEP)
    e_gain = mup.per_group.get((f8.id["e"],), 0)
    f4 = Fig("fig4")
    a, c = f4.id["a"], f4.id["c"]
    honest = idm_stub(f4.net, f4.profile, f4.truth).utility[a]
    syb = len(f4.net.nodes)
    net = f4.net.with_edges([(a, syb)], [syb])
    truth = f4.truth.with_values({syb: f4.truth[a]})
    prof = ReportProfile.truthful(f4.net, f4.truth).replace(
        {a: Report(f4.truth[a], {c, syb}), syb: Report(F("0.9"))}, net=net)
    out = idm_stub(net, prof, truth)
    attack = out.utility[a] + out.utility[syb]
    ok = not bad and not mup.passed and e_gain > 0 and honest == 0 and attack == F(4, 5)
    criterion("SP oracle: PDM and SP-MUPDM pass, MUPDM fails on Fig. 8, IDM stub Fig. 4 attack", ok,
              f"failures={bad}; MUPDM gain {mup.max_gain} (e alone {e_gain}); IDM {honest} -> {attack}; "
              f"{time.perf_counter() - start:.1f}s")


def test_cp_oracle(criterion):
    start = time.perf_counter()
    f6 = Fig("fig6")
    cp = make_mechanism("fpdm-bf-cp")
    bad = []
    if not collusion_oracle(f6.net, f6.truth, cp, 3, STEP).passed:
        bad.append("fig6 grid")
    if not collusion_oracle(f6.net, f6.truth, cp, 3, STEP, common_values=[F(1, 10)]).passed:
        bad.append("fig6 instance")
    rng = np.random.default_rng(606)
    for k in range(50):
        net, truth = generate(("tree", "gnp-connected", "layered")[k % 3], int(rng.integers(3, 5)), rng)
        if not collusion_oracle(net, truth, cp, 3, COARSE).passed:
            bad.append(f"random {k}")
    idm = collusion_oracle(f6.net, f6.truth, make_mechanism("idm-stub"), 3, STEP, common_values=[F(1, 10)])
    ok = not bad and not idm.passed and idm.max_gain == F(1, 10)
    criterion("CP oracle: collusion-proof f-PDM passes, IDM stub fails on Fig. 6", ok,
              f"failures={bad}; IDM cartel gain {idm.max_gain}; {time.perf_counter() - start:.1f}s")


def test_efficiency_bounds(criterion):
    start = time.perf_counter()
    bad = []
    for idx, (net, truth, _) in enumerate(SUITE):
        prof = ReportProfile.truthful(net, truth)
        outs = list(single_unit_outcomes(net, truth, prof))
        if make_mechanism("pdm").admits(net, prof):
            outs.append(("pdm", make_mechanism("pdm").evaluate(net, prof, truth)))
        for label, out in outs:
            rep = efficiency_check(out, truth)
            if not rep.passed:
                bad.append((idx, label))
    rng = np.random.default_rng(4242)
    mc = 0
    while mc < 200:
        m = 2 + mc % 2
        net, truth = generate(("gnp-connected", "layered", "tree")[mc % 3], int(rng.integers(4, 9)), rng)
        if len(net.seller_neighbors) < m:
            continue
        prof = ReportProfile.truthful(net, truth)
        est = fast_multi_welfare(net, prof, truth, m, 10_000, rng)
        rep = efficiency_check(F(est.lcb), truth, m=m)
        if not rep.passed:
            bad.append(("mupdm mc", mc))
        mc += 1
    criterion("Efficiency bounds (single unit exact, MUPDM Monte Carlo at the 99% LCB)", not bad,
              f"violations={bad}; {mc} Monte Carlo instances; {time.perf_counter() - start:.1f}s")


def _layer_sizes(total):
    if total == 0:
        yield ()
        return
    for k in range(1, total + 1):
        for rest in _layer_sizes(total - k):
            yield (k,) + rest


def _check_dominators(nodes, edges, roots):
    d = {r: 1 for r in roots}
    for a, b in sorted(edges):
        d[b] = d[a] + 1
    want = {k: (SELLER if v == "s" else v) for k, v in brute_dominators(nodes, edges, roots).items()}
    return dominator_tree(d, edges, roots) == want


def test_dominator_equivalence(criterion):
    start = time.perf_counter()
    count = bad = 0
    for n in range(1, 9):
        for sizes in _layer_sizes(n):
            for nodes, edges, roots in all_layered_dags(sizes):
                count += 1
                bad += not _check_dominators(nodes, edges, roots)
    rng = np.random.default_rng(8)
    for _ in range(500):
        n = int(rng.integers(2, 9))
        cuts = sorted(rng.choice(np.arange(1, n), size=int(rng.integers(0, n)), replace=False)) if n > 1 else []
        bounds = [0] + [int(c) for c in cuts] + [n]
        layers = [list(range(lo, hi)) for lo, hi in zip(bounds, bounds[1:])]
        edges = []
        for up, down in zip(layers, layers[1:]):
            for j in down:
                preds = [i for i in up if rng.random() < 0.5] or [int(rng.choice(up))]
                edges += [(i, j) for i in preds]
        count += 1
        bad += not _check_dominators(list(range(n)), edges, layers[0])
    criterion("Dominator tree matches brute-force dominance", bad == 0,
              f"{count} layered DAGs up to 8 nodes, {bad} mismatches, {time.perf_counter() - start:.1f}s")


def _deviations(net, prof, i, max_sybils):
    for sub in subsets(net.out_neighbors(i)):
        yield net, prof.replace({i: Report(0, sub)})
    for count in range(1, max_sybils + 1):
        for dev_net, inv, sybils in sybil_structures(net, i, count):
            yield dev_net, prof.replace({x: Report(0, inv[x]) for x in [i] + sybils}, net=dev_net)


def _q_violations(net, kinds, max_sybils):
    prof = ReportProfile.truthful(net, TrueProfile({i: 0 for i in net.nodes}))
    out = {type(k).__name__: 0 for k in kinds}
    checks = 0
    for i in sorted(net.nodes):
        devs = list(_deviations(net, prof, i, max_sybils))
        for kind in kinds:
            before = prefix_set_masses(enumerate_distribution(kind, net, prof), i)
            for dev_net, dev_prof in devs:
                checks += 1
                if prefix_set_masses(enumerate_distribution(kind, dev_net, dev_prof), i) != before:
                    out[type(kind).__name__] += 1
    return out, checks


def test_sybil_proof_map_property(criterion):
    start = time.perf_counter()
    kinds = [BreadthFirst(), GeneralizedBreadthFirst()]
    total = {"BreadthFirst": 0, "GeneralizedBreadthFirst": 0}
    checks = graphs = 0
    for n in (1, 2, 3):
        for net in all_connected_networks(n):
            v, c = _q_violations(net, kinds, 2)
            graphs += 1
            checks += c
            for k in v:
                total[k] += v[k]
    rng = np.random.default_rng(64)
    for k in range(25):
        net, _ = generate(("gnp-connected", "tree", "layered")[k % 3], 4, rng)
        v, c = _q_violations(net, kinds, 2)
        graphs += 1
        checks += c
        for key in v:
            total[key] += v[key]
    f = Fig("fig2")
    weighted, _ = _q_violations(f.net, [WeightedGBF()], 1)
    ok = not any(total.values()) and weighted["WeightedGBF"] > 0
    criterion("Sybil-proof map property (q_A invariance); WeightedGBF witness", ok,
              f"{checks} checks on {graphs} graphs, violations={total}, "
              f"WeightedGBF witnesses={weighted['WeightedGBF']}, {time.perf_counter() - start:.1f}s")


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "dak", *args], capture_output=True, check=False).stdout


def test_determinism(criterion, tmp_path):
    commands = [
        ("run", "fig2", "--mode", "mc", "--samples", "3000", "--seed", "11"),
        ("run", "fig7", "--mode", "mc", "--samples", "3000", "--seed", "11"),
        ("run", "fig8"),
        ("gen", "gnp-connected", "6", "0.4", "--seed", "1"),
        ("sweep", "--gen", "tree", "--count", "5", "--mech", "fpdm-bf,fpdm-gbf", "--seed", "3"),
        ("verify", "--random", "4", "2", "--mech", "spmupdm", "--items", "2", "--suite", "basic,ic", "--seed", "5"),
    ]
    differ = [" ".join(c) for c in commands if _cli(*c) != _cli(*c) or not _cli(*c)]
    criterion("Determinism: repeated commands are byte-identical", not differ, f"differing={differ}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))

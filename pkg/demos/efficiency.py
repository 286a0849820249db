"""Welfare against the guarantees on random networks, exact and sampled.

    python3 demos/efficiency.py [count]
"""
import sys
from fractions import Fraction

import numpy as np

from dak.fpdm import fpdm_expected
from dak.generate import generate
from dak.graph import ReportProfile
from dak.montecarlo import fast_multi_welfare
from dak.verify.bounds import efficiency_check


def single_item(count, rng):
    worst = None
    for _ in range(count):
        net, truth = generate("gnp-connected", 6, rng)
        out = fpdm_expected(net, ReportProfile.truthful(net, truth), truth)
        top = max(truth.values())
        ratio = out.welfare / top if top else Fraction(1)
        worst = ratio if worst is None else min(worst, ratio)
        assert efficiency_check(out, truth).passed
    print(f"f-PDM, {count} networks of 6 buyers: worst E[W] / v_max = {float(worst):.3f}")


def two_items(count, rng):
    rows = []
    while len(rows) < count:
        net, truth = generate("layered", 8, rng, layers=3)
        if len(net.seller_neighbors) < 2:
            continue
        prof = ReportProfile.truthful(net, truth)
        top2 = float(sum(sorted(truth.values())[-2:]))
        plain = fast_multi_welfare(net, prof, truth, 2, 20_000, rng)
        sp = fast_multi_welfare(net, prof, truth, 2, 20_000, rng, sybil_proof=True)
        rows.append((plain.mean / top2 if top2 else 1, sp.mean / top2 if top2 else 1))
    a = np.array(rows)
    print(f"two items, {count} layered networks of 8 buyers: mean share of the top-2 value "
          f"MUPDM {a[:, 0].mean():.3f}, SP-MUPDM {a[:, 1].mean():.3f}")


if __name__ == "__main__":
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    rng = np.random.default_rng(0)
    single_item(n, rng)
    two_items(n, rng)

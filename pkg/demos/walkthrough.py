"""Walk through the bundled figure instances and print their exact outcomes.

    python3 demos/walkthrough.py
"""
from dak.graph import ReportProfile
from dak.maps import BreadthFirst, GeneralizedBreadthFirst, enumerate_distribution
from dak.pdm import PathInstance, pdm_allocation, pdm_expected_stats
from dak.fpdm import fpdm_expected
from dak.mupdm import mupdm_expected, spmupdm_expected
from dak.scenario import resolve


def load(name):
    s = resolve(name)
    net, truth = s.network(), s.truth()
    return s, net, truth, ReportProfile.truthful(net, truth)


def label(s, seq):
    return "".join(str(s.name(x)) for x in seq)


def path_example():
    print("PDM on the path a-b-c-d with bids 0.2, 0.1, 0.4, 1")
    inst = PathInstance.truthful(["0.2", "0.1", "0.4", "1"])
    print("  win probabilities:", ", ".join(str(p) for p in pdm_allocation(inst)))
    st = pdm_expected_stats(inst)
    print(f"  expected welfare {st.welfare}, seller revenue {st.revenue}")


def triangle():
    s, net, truth, prof = load("fig2")
    print("\nf-PDM on the triangle (a and b know the seller, only a knows c)")
    for kind in (BreadthFirst(), GeneralizedBreadthFirst()):
        dist = enumerate_distribution(kind, net, prof)
        print(f"  {kind.name}: " + ", ".join(f"{label(s, o)}={p}" for o, p in dist))
    out = fpdm_expected(net, prof, truth, GeneralizedBreadthFirst())
    for c in out.breakdown:
        print(f"    ordering {label(s, c.ordering)}: welfare {c.stats.welfare}, "
              f"head surcharge {c.surcharge}")
    print(f"  expected welfare {out.welfare}, revenue {out.revenue}")


def two_items():
    s, net, truth, prof = load("fig7")
    print("\nMUPDM with two items on the same triangle")
    out = mupdm_expected(net, prof, truth, 2)
    for c in out.breakdown:
        paths = " | ".join(label(s, p.path) for p in c.paths)
        print(f"  {paths}  (p={c.case.probability}): welfare {c.welfare}, revenue {c.revenue}")
    print(f"  expected welfare {out.welfare}, revenue {out.revenue}")

    s, net, truth, prof = load("fig8")
    print("\nSP-MUPDM on the five-buyer network: the dominator tree fixes every path")
    out = spmupdm_expected(net, prof, truth, 2)
    for c in out.breakdown:
        print("  paths " + " | ".join(label(s, p.path) for p in c.paths) + f" with probability {c.case.probability}")
    print(f"  expected welfare {out.welfare}, revenue {out.revenue}")


if __name__ == "__main__":
    path_example()
    triangle()
    two_items()

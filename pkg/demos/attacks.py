"""Deviations the oracles find, and the ones they cannot.

    python3 demos/attacks.py
"""
from fractions import Fraction

from dak.graph import SocialNetwork, TrueProfile
from dak.scenario import resolve
from dak.verify.mechanisms import make_mechanism
from dak.verify.oracles import collusion_oracle, ic_oracle, sybil_oracle

STEP = Fraction(1, 8)


def show(title, rep, names=None):
    def name(i):
        return names[i] if i < len(names) else f"sybil{i - len(names) + 1}"

    print(f"{title}: {rep.verdict}, best gain {rep.max_gain} "
          f"({rep.structures} structures, {rep.profiles} bid profiles)")
    if rep.witness is not None and rep.max_gain > 0:
        for i, r in rep.witness.reports.items():
            what = "stays away" if r is None else f"bids {r.bid}, invites {sorted(name(x) for x in r.invited)}"
            print(f"    {name(i)} {what}")


def strawman():
    # a and b know the seller and each other; c hangs below a
    net = SocialNetwork(range(3), [(0, 1), (1, 0), (0, 2)], [0, 1])
    truth = TrueProfile({0: 1, 1: 0, 2: 1})
    show("two items sold by repeating single-item f-PDM", ic_oracle(net, truth, make_mechanism(
        "repeated-fpdm-strawman", 2), STEP), "abc")
    show("MUPDM on the same instance", ic_oracle(net, truth, make_mechanism("mupdm", 2), STEP), "abc")


def sybils():
    s = resolve("fig8")
    net, truth = s.network(), s.truth()
    show("\nMUPDM against fake identities", sybil_oracle(net, truth, make_mechanism("mupdm", 2), 2, STEP), s.nodes)
    show("SP-MUPDM against fake identities", sybil_oracle(net, truth, make_mechanism("spmupdm", 2), 2, STEP), s.nodes)
    s = resolve("fig4")
    show("IDM-style stub against fake identities",
         sybil_oracle(s.network(), s.truth(), make_mechanism("idm-stub"), 2, STEP), s.nodes)


def cartels():
    s = resolve("fig6")
    net, truth = s.network(), s.truth()
    common = [Fraction(1, 10)]
    for mech in ("idm-stub", "fpdm-bf", "fpdm-bf-cp"):
        show(f"\n{mech} against cartels", collusion_oracle(net, truth, make_mechanism(mech), 3, STEP,
                                                            common_values=common), s.nodes)


if __name__ == "__main__":
    strawman()
    sybils()
    cartels()

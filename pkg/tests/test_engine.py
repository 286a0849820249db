from fractions import Fraction as F

import numpy as np
from hypothesis import given, settings, strategies as st

from dak.engine import BatchEvaluator, Case, Lottery, common_scale, evaluate, surcharge_of
from dak.fpdm import fpdm_lottery
from dak.graph import ReportProfile
from dak.maps import GeneralizedBreadthFirst
from dak.mupdm import mupdm_lottery, spmupdm_lottery
from conftest import random_instances

import pytest

INSTANCES = random_instances(30, seed=17, sizes=(2, 3, 4, 5))


def lotteries(net, prof):
    yield fpdm_lottery(net, prof)
    yield fpdm_lottery(net, prof, GeneralizedBreadthFirst())
    yield mupdm_lottery(net, prof, 2)
    yield spmupdm_lottery(net, prof, 3)


def test_lottery_rejects_bad_mass():
    with pytest.raises(ValueError):
        Lottery((Case(((0,),), (frozenset(),), F(1, 2)),))


def test_merged_adds_duplicate_cases():
    c = Case(((0,), (1,)), (frozenset(), frozenset()), F(1, 2))
    lot = Lottery.merged([c, c], 2)
    assert len(lot.cases) == 1 and lot.cases[0].probability == 1


def test_surcharge_of_empty_base_is_zero():
    assert surcharge_of(frozenset(), {}) == 0
    assert surcharge_of({0, 1}, {0: F(1, 2), 1: F(3, 10)}) == F(1, 8)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(range(len(INSTANCES))), st.data())
def test_batch_matches_exact(k, data):
    net, truth = INSTANCES[k]
    prof = ReportProfile.truthful(net, truth)
    cols = sorted(net.nodes)
    rows = [[F(data.draw(st.integers(0, 8)), 8) for _ in cols] for _ in range(3)]
    for lot in lotteries(net, prof):
        ev = BatchEvaluator(lot, cols)
        D = common_scale([x for r in rows for x in r] + [truth[i] for i in cols])
        res = ev.run(np.array([[int(x * D) for x in r] for r in rows], dtype=object),
                     np.array([int(truth[i] * D) for i in cols], dtype=object), D)
        for r, row in enumerate(rows):
            agg = evaluate(lot, dict(zip(cols, row)), truth, cols)
            for c, i in enumerate(cols):
                assert F(int(res["utility"][r, c]), res["money_scale"]) == agg.utility[i]
                assert F(int(res["win"][r, c]), res["prob_scale"]) == agg.win_probability[i]
            assert F(int(res["welfare"][r]), res["money_scale"]) == agg.welfare
            assert F(int(res["revenue"][r]), res["money_scale"]) == agg.revenue


def test_int64_and_object_paths_agree():
    net, truth = INSTANCES[3]
    prof = ReportProfile.truthful(net, truth)
    cols = sorted(net.nodes)
    lot = fpdm_lottery(net, prof)
    ev = BatchEvaluator(lot, cols)
    D = 100
    bids = np.array([[int(truth[i] * D) for i in cols]])
    vals = np.array([int(truth[i] * D) for i in cols])
    small = ev.run(bids, vals, D)
    big = ev.run(bids * 10 ** 8, vals * 10 ** 8, D * 10 ** 8)
    assert small["utility"].dtype == np.int64 and big["utility"].dtype == object
    scale = small["money_scale"]
    for c in range(len(cols)):
        assert F(int(small["utility"][0, c]), scale) == F(int(big["utility"][0, c]), big["money_scale"])


def test_aggregate_identities():
    for net, truth in INSTANCES:
        prof = ReportProfile.truthful(net, truth)
        for lot in lotteries(net, prof):
            agg = evaluate(lot, prof.bids(), truth, net.nodes)
            assert sum(agg.payment.values()) == agg.revenue
            assert sum(agg.utility.values()) + agg.revenue == agg.welfare
            assert agg.gross_payments - agg.gross_rewards == agg.revenue

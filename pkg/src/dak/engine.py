"""Shared evaluation engine for path-based mechanisms.

Every mechanism in this package randomises only over *structure*: which
buyers form which path, who heads each path, and whose bids count towards a
head's surcharge.  None of that depends on bids.  A :class:`Lottery` captures
this bid-independent part; evaluating it at a bid vector runs PDM on every
path and charges each head half the squared highest bid in its surcharge base.

Two evaluators are provided:

* :func:`evaluate` -- exact ``Fraction`` arithmetic, case by case, built on
  :mod:`dak.pdm`.  This is the reference route.
* :class:`BatchEvaluator` -- exact integer arithmetic with numpy over a batch
  of bid vectors, used by the brute-force oracles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .pdm import ExpectedStats, PathInstance, pdm_allocation, pdm_payment_matrix, stats_from, winner_prices

ZERO = Fraction(0)


@dataclass(frozen=True)
class Case:
    paths: tuple
    bases: tuple
    probability: Fraction


@dataclass(frozen=True)
class Lottery:
    cases: tuple
    items: int = 1

    def __post_init__(self):
        total = sum((c.probability for c in self.cases), ZERO)
        if total != 1:
            raise ValueError(f"case probabilities sum to {total}, not 1")

    @classmethod
    def merged(cls, cases: Iterable[Case], items: int = 1) -> "Lottery":
        acc: dict = {}
        for c in cases:
            key = tuple(sorted(zip(c.paths, c.bases)))
            acc[key] = acc.get(key, ZERO) + c.probability
        out = tuple(Case(tuple(p for p, _ in key), tuple(b for _, b in key), pr)
                    for key, pr in sorted(acc.items(), key=lambda kv: kv[0]))
        return cls(out, items)

    def participants(self) -> frozenset:
        return frozenset(x for p in self.cases[0].paths for x in p)


@dataclass(frozen=True)
class PathResult:
    path: tuple
    stats: ExpectedStats
    head: int
    surcharge: Fraction


@dataclass(frozen=True)
class CaseResult:
    case: Case
    paths: tuple  # PathResult per path
    welfare: Fraction
    revenue: Fraction


@dataclass
class Aggregate:
    win_probability: dict
    utility: dict
    payment: dict
    welfare: Fraction
    revenue: Fraction
    gross_payments: Fraction
    gross_rewards: Fraction
    cases: list = field(default_factory=list)


def surcharge_of(base: Iterable[int], bids: Mapping[int, Fraction]) -> Fraction:
    top = max((bids[x] for x in base), default=ZERO)
    return top * top / 2


def evaluate(lottery: Lottery, bids: Mapping[int, Fraction], values: Mapping[int, Fraction],
             nodes: Iterable[int]) -> Aggregate:
    """Exact expected outcome of a lottery at the given bids."""
    nodes = sorted(nodes)
    win = {i: ZERO for i in nodes}
    util = {i: ZERO for i in nodes}
    pay = {i: ZERO for i in nodes}
    welfare = revenue = gross_in = gross_out = ZERO
    results = []
    cache: dict = {}
    for case in lottery.cases:
        p = case.probability
        prs = []
        cw = cr = ZERO
        for path, base in zip(case.paths, case.bases):
            key = (path, base)
            if key not in cache:
                inst = PathInstance([bids[x] for x in path], [values[x] for x in path])
                pi = pdm_allocation(inst)
                stats = stats_from(pi, pdm_payment_matrix(inst), inst.values)
                prices = winner_prices(inst)
                moved = sum((pi[j] * prices[j] for j in range(len(path))), ZERO)
                cache[key] = (stats, surcharge_of(base, bids), moved)
            stats, sur, moved = cache[key]
            prs.append(PathResult(path, stats, path[0], sur))
            for pos, x in enumerate(path):
                win[x] += p * stats.win_probability[pos]
                u = stats.utility[pos] - (sur if pos == 0 else ZERO)
                util[x] += p * u
                pay[x] += p * (stats.win_probability[pos] * values[x] - u)
            cw += stats.welfare
            cr += stats.revenue + sur
            gross_in += p * (moved + sur)
            gross_out += p * moved
        welfare += p * cw
        revenue += p * cr
        results.append(CaseResult(case, tuple(prs), cw, cr))
    return Aggregate(win, util, pay, welfare, revenue, gross_in, gross_out, results)


# --------------------------------------------------------------------------
# batched exact integer evaluation

def common_scale(numbers: Iterable[Fraction]) -> int:
    d = 1
    for q in numbers:
        d = math.lcm(d, Fraction(q).denominator)
    return d


class BatchEvaluator:
    """Evaluate one lottery at many bid vectors with exact integer arithmetic.

    Bids and values are integers at scale ``D`` (a common denominator).  Money
    amounts come out at scale ``2 * D**2 * W`` where ``W`` is the common
    denominator of the (merged) path weights.  Paths with identical content
    and surcharge base are merged before evaluation since expected utility is
    linear in the path weights.
    """

    def __init__(self, lottery: Lottery, columns: Sequence[int]):
        self.columns = list(columns)
        self.items = lottery.items
        self._cast: dict = {}
        self.col = {x: k for k, x in enumerate(self.columns)}
        weights: dict = {}
        for case in lottery.cases:
            for path, base in zip(case.paths, case.bases):
                weights[(path, base)] = weights.get((path, base), ZERO) + case.probability
        self.W = common_scale(weights.values())
        groups: dict[int, list] = {}
        for (path, base), w in sorted(weights.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1]))):
            groups.setdefault(len(path), []).append((path, base, int(w * self.W)))
        n = len(self.columns)
        self.groups = []
        for length, entries in sorted(groups.items()):
            idx = np.array([[self.col[x] for x in p] for p, _, _ in entries], dtype=np.intp)
            mask = np.zeros((len(entries), n), dtype=bool)
            for g, (_, base, _) in enumerate(entries):
                for x in base:
                    mask[g, self.col[x]] = True
            w = np.array([w for _, _, w in entries], dtype=object)
            scatter = []
            for pos in range(length):
                s = np.zeros((len(entries), n), dtype=object)
                s[np.arange(len(entries)), idx[:, pos]] = w
                scatter.append(s)
            self.groups.append((idx, mask, w, scatter))

    def _groups_as(self, dtype):
        key = np.dtype(dtype).str
        if key not in self._cast:
            self._cast[key] = [(idx, mask, w.astype(dtype), [s.astype(dtype) for s in scatter])
                               for idx, mask, w, scatter in self.groups]
        return self._cast[key]

    def run(self, bids: np.ndarray, values: np.ndarray, D: int) -> dict:
        """``bids``: (K, n) ints at scale D; ``values``: (n,) ints at scale D.

        Returns integer arrays: ``utility`` (K, n) and ``welfare``/``revenue``
        (K,) at scale ``2 D^2 W``; ``win`` (K, n) at scale ``D W``.
        """
        dtype = np.int64 if 16 * D * D * self.W * self.items < 2 ** 62 else object
        bids = np.asarray(bids).astype(dtype)
        values = np.asarray(values).astype(dtype)
        K, n = bids.shape
        util = np.zeros((K, n), dtype=dtype)
        win = np.zeros((K, n), dtype=dtype)
        welfare = np.zeros(K, dtype=dtype)
        revenue = np.zeros(K, dtype=dtype)
        for idx, mask, w, scatter in self._groups_as(dtype):
            x = bids[:, idx]                                  # (K, G, L)
            run = np.maximum.accumulate(x, axis=2)
            top = run[:, :, -1]
            prior = np.zeros_like(x)
            prior[:, :, 1:] = run[:, :, :-1]
            pi = np.maximum(x - prior, 0)
            pi[:, :, 0] = D - top + x[:, :, 0]
            price2 = prior + x                                # twice the price, scale D
            price2[:, :, 0] = 0
            v = values[idx]                                   # (G, L)
            base_top = np.where(mask[None, :, :], bids[:, None, :], 0).max(axis=2)  # (K, G)
            sur = base_top * base_top                         # scale 2D^2
            u = pi * (2 * v[None] - price2)                   # own win net of price
            u[:, :, 0] = 2 * pi[:, :, 0] * v[None, :, 0] + (pi[:, :, 1:] * price2[:, :, 1:]).sum(axis=2) - sur
            for pos, s in enumerate(scatter):
                util += u[:, :, pos].dot(s)
                win += pi[:, :, pos].dot(s)
            welfare += (2 * pi * v[None]).sum(axis=2).dot(w)
            revenue += sur.dot(w)
        return {"utility": util, "win": win, "welfare": welfare, "revenue": revenue,
                "money_scale": 2 * D * D * self.W, "prob_scale": D * self.W}

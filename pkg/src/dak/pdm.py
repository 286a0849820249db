"""Probabilistic diffusion mechanism on a path graph.

Positions are 0-based: position 0 is the buyer the seller knows directly.
Everything is exact (``Fraction``); sampling is the only place floats appear,
and even there the draw is converted exactly before comparison.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .graph import as_rational

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class PathInstance:
    bids: tuple
    values: Optional[tuple] = None

    def __init__(self, bids: Sequence, values: Optional[Sequence] = None):
        b = tuple(as_rational(x) for x in bids)
        if not b:
            raise ValueError("a path needs at least one buyer")
        if any(not 0 <= x <= 1 for x in b):
            raise ValueError("bids must lie in [0, 1]")
        v = None
        if values is not None:
            v = tuple(as_rational(x) for x in values)
            if len(v) != len(b):
                raise ValueError("values and bids differ in length")
            if any(not 0 <= x <= 1 for x in v):
                raise ValueError("values must lie in [0, 1]")
        object.__setattr__(self, "bids", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def truthful(cls, values: Sequence) -> "PathInstance":
        return cls(values, values)

    def __len__(self):
        return len(self.bids)


@dataclass(frozen=True)
class ExpectedStats:
    win_probability: tuple
    utility: tuple
    welfare: Fraction
    revenue: Fraction


def prior_maxima(bids: Sequence[Fraction]) -> list:
    """``max`` of the bids strictly before each position (0 for position 0)."""
    out = []
    m = ZERO
    for b in bids:
        out.append(m)
        if b > m:
            m = b
    return out


def pdm_allocation(inst: PathInstance) -> tuple:
    b = inst.bids
    prior = prior_maxima(b)
    top = max(b)
    pi = [ONE - top + b[0]]
    for j in range(1, len(b)):
        pi.append(max(ZERO, b[j] - prior[j]))
    return tuple(pi)


def winner_prices(inst: PathInstance) -> tuple:
    """Price paid by each position if it wins (0 for position 0 and for
    positions that cannot win).  Position 0 receives the same amount."""
    b = inst.bids
    prior = prior_maxima(b)
    prices = [ZERO]
    for j in range(1, len(b)):
        prices.append((prior[j] + b[j]) / 2 if b[j] > prior[j] else ZERO)
    return tuple(prices)


def pdm_payment_matrix(inst: PathInstance) -> tuple:
    """``P[i][j]``: what position ``i`` pays when position ``j`` wins."""
    n = len(inst)
    prices = winner_prices(inst)
    rows = [[ZERO] * n for _ in range(n)]
    for j in range(1, n):
        if prices[j]:
            rows[j][j] = prices[j]
            rows[0][j] = -prices[j]
    return tuple(tuple(r) for r in rows)


def stats_from(pi: Sequence[Fraction], pay: Sequence[Sequence[Fraction]],
               values: Sequence[Fraction]) -> ExpectedStats:
    n = len(pi)
    util = tuple(pi[i] * values[i] - sum(pay[i][j] * pi[j] for j in range(n)) for i in range(n))
    welfare = sum((pi[i] * values[i] for i in range(n)), ZERO)
    revenue = sum((pi[i] * pay[j][i] for i in range(n) for j in range(n)), ZERO)
    return ExpectedStats(tuple(pi), util, welfare, revenue)


def pdm_expected_stats(inst: PathInstance) -> ExpectedStats:
    if inst.values is None:
        raise ValueError("expected statistics need true values")
    return stats_from(pdm_allocation(inst), pdm_payment_matrix(inst), inst.values)


def draw_index(probabilities: Sequence[Fraction], u) -> int:
    """First index whose cumulative probability exceeds the uniform draw ``u``."""
    u = Fraction(u) if not isinstance(u, Fraction) else u
    acc = ZERO
    last = 0
    for idx, p in enumerate(probabilities):
        if p:
            last = idx
        acc += p
        if u < acc:
            return idx
    return last


def pdm_sample(inst: PathInstance, rng: Optional[np.random.Generator] = None, u=None) -> tuple:
    """One realisation: ``(winner position, payment vector)``.

    Exactly one uniform draw is consumed from ``rng`` unless ``u`` is given.
    """
    if u is None:
        if rng is None:
            raise ValueError("pass a generator or an explicit draw")
        u = rng.random()
    pi = pdm_allocation(inst)
    w = draw_index(pi, u)
    pay = pdm_payment_matrix(inst)
    return w, tuple(pay[i][w] for i in range(len(inst)))


def expost_payment_variant(inst: PathInstance, surcharge_base: Fraction = ZERO, *,
                           experimental: bool = False) -> tuple:
    """Spread the head surcharge ``base**2 / 2`` over winning events.

    The head is charged event by event (own win first, then later winners in
    path order), never more than what that event pays her: her own bid when
    she wins, the referral reward otherwise.  The expected extra charge equals
    the lump-sum surcharge.  Events of probability zero are charged nothing.
    """
    if not experimental:
        raise RuntimeError("the ex-post payment variant is experimental; pass experimental=True")
    base = as_rational(surcharge_base)
    pi = pdm_allocation(inst)
    prices = winner_prices(inst)
    rows = [list(r) for r in pdm_payment_matrix(inst)]
    remaining = base * base / 2
    caps = [inst.bids[0]] + list(prices[1:])
    for j, p in enumerate(pi):
        if remaining <= 0:
            break
        if p == 0 or caps[j] == 0:
            continue
        charge = min(caps[j], remaining / p)
        rows[0][j] += charge
        remaining -= charge * p
    if remaining > 0:
        raise ValueError("surcharge exceeds what the head can be charged ex post")
    return tuple(tuple(r) for r in rows)

"""Seeded Monte Carlo estimates with 99% normal-approximation intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fpdm import SurchargeVariant, fpdm_sample, realized_utilities
from .graph import SELLER, SocialNetwork, ReportProfile, TrueProfile, participation_closure
from .maps import BreadthFirst, GeneralizedBreadthFirst, WeightedGBF, bfs_layers
from .mupdm import _dominators, _k, multi_run, mupdm_assign, spmupdm_map

Z99 = 2.5758293035489004


@dataclass(frozen=True)
class Estimate:
    mean: float
    std: float
    n: int

    @property
    def half_width(self) -> float:
        return Z99 * self.std / math.sqrt(self.n) if self.n > 1 else math.inf

    @property
    def lcb(self) -> float:
        return self.mean - self.half_width

    @property
    def ucb(self) -> float:
        return self.mean + self.half_width


def estimate(xs) -> Estimate:
    xs = np.asarray(xs, dtype=float)
    std = float(xs.std(ddof=1)) if len(xs) > 1 else 0.0
    return Estimate(float(xs.mean()), std, len(xs))


@dataclass
class MCResult:
    welfare: Estimate
    revenue: Estimate
    win: dict = field(default_factory=dict)
    utility: dict = field(default_factory=dict)
    items: int = 1

    @property
    def welfare_lcb(self) -> Fraction:
        return Fraction(self.welfare.lcb)


_SINGLE = {"fpdm-bf": (BreadthFirst(), SurchargeVariant.STANDARD),
           "fpdm-gbf": (GeneralizedBreadthFirst(), SurchargeVariant.STANDARD),
           "fpdm-wgbf": (WeightedGBF(), SurchargeVariant.STANDARD),
           "fpdm-bf-cp": (BreadthFirst(), SurchargeVariant.COLLUSION_PROOF),
           "pdm": (BreadthFirst(), SurchargeVariant.STANDARD)}


def simulate(mechanism: str, net: SocialNetwork, profile: ReportProfile, truth: TrueProfile,
             items: int, samples: int, seed: int) -> MCResult:
    """Realised runs of one mechanism; the generator is owned here and seeded once."""
    if samples < 2:
        raise ValueError("need at least two samples")
    rng = np.random.default_rng(seed)
    nodes = sorted(net.nodes)
    welfare = np.empty(samples)
    revenue = np.empty(samples)
    wins = np.zeros((samples, len(nodes)))
    utils = np.zeros((samples, len(nodes)))
    col = {x: k for k, x in enumerate(nodes)}
    for s in range(samples):
        if mechanism in _SINGLE:
            kind, variant = _SINGLE[mechanism]
            real = fpdm_sample(net, profile, truth, kind, variant, rng)
            winners = (real.winner,)
            util = realized_utilities(real, truth)
        elif mechanism in ("mupdm", "spmupdm"):
            assign = (mupdm_assign if mechanism == "mupdm" else spmupdm_map)(net, profile, items, rng)
            real = multi_run(assign, profile, truth, rng)
            winners = real.winners
            util = {x: (truth[x] if x in winners else 0) - t for x, t in real.transfers.items()}
        else:
            raise ValueError(f"{mechanism} has no Monte Carlo mode")
        welfare[s] = float(real.welfare)
        revenue[s] = float(real.revenue)
        for x in winners:
            wins[s, col[x]] = 1.0
        for x, u in util.items():
            utils[s, col[x]] = float(u)
    return MCResult(estimate(welfare), estimate(revenue),
                    {x: estimate(wins[:, col[x]]) for x in nodes},
                    {x: estimate(utils[:, col[x]]) for x in nodes}, items)


def fast_multi_welfare(net: SocialNetwork, profile: ReportProfile, truth: TrueProfile, m: int,
                       samples: int, rng: np.random.Generator, sybil_proof: bool = False) -> Estimate:
    """Vectorised realised welfare of MUPDM (or SP-MUPDM) in floating point.

    Draws a breadth-first ordering, a path label per position and one winner
    per path for every sample at once.
    """
    k = _k(net, profile, m)
    bids = profile.bids()
    parts = []
    for layer in bfs_layers(net, profile):
        parts.append(rng.permuted(np.tile(np.array(layer), (samples, 1)), axis=1))
    order = np.concatenate(parts, axis=1)
    K, n = order.shape
    label = np.empty((K, n), dtype=int)
    label[:, :k] = np.arange(k)
    if not sybil_proof:
        label[:, k:] = rng.integers(k, size=(K, n - k))
    else:
        dom, _ = _dominators(net, profile)
        size = max(participation_closure(net, profile)) + 1
        by_node = np.full((K, size), -1)
        rows = np.arange(K)
        for pos in range(n):
            who = order[:, pos]
            if pos < k:
                lab = np.full(K, pos)
            else:
                d = np.array([dom[int(x)] for x in who])
                free = d == SELLER
                lab = np.where(free, rng.integers(k, size=K), by_node[rows, np.where(free, 0, d)])
            label[:, pos] = lab
            by_node[rows, who] = lab
    b = np.vectorize(lambda x: float(bids[int(x)]))(order)
    v = np.vectorize(lambda x: float(truth[int(x)]))(order)
    total = np.zeros(K)
    u = rng.random((K, k))
    for path in range(k):
        mask = label == path
        masked = np.where(mask, b, -1.0)
        run = np.maximum.accumulate(masked, axis=1)
        prior = np.concatenate([np.full((K, 1), -1.0), run[:, :-1]], axis=1)
        pi = np.where(mask, np.maximum(0.0, b - prior), 0.0)
        pi[:, path] = 1.0 - run[:, -1] + b[:, path]
        cum = np.cumsum(pi, axis=1)
        idx = np.argmax(cum > u[:, path:path + 1], axis=1)
        total += v[np.arange(K), idx]
    return estimate(total)

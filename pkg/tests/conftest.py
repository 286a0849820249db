import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dak.graph import ReportProfile
from dak.generate import generate
from dak.scenario import resolve


class Fig:
    def __init__(self, name):
        self.scenario = resolve(name)
        self.net = self.scenario.network()
        self.truth = self.scenario.truth()
        self.profile = ReportProfile.truthful(self.net, self.truth)
        self.id = self.scenario.ids


@pytest.fixture
def fig():
    return Fig


def random_instances(count, seed, kinds=("tree", "gnp-connected", "layered", "path"), sizes=(2, 3, 4, 5)):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        kind = kinds[k % len(kinds)]
        n = int(rng.choice(sizes))
        out.append(generate(kind, n, rng))
    return out

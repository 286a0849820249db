"""Scenario files: JSON documents describing one auction instance.

Schema::

    {"nodes": ["a", "b"], "edges": [["a", "b"]], "seller_neighbors": ["a"],
     "valuations": {"a": "0.3", "b": "0"}, "items": 1, "mechanism": "fpdm-bf",
     "mode": "exact", "seed": 0, "samples": 10000}

Node names may be strings or integers; they are mapped to dense ids in the
order listed.  Valuations are strings so that they parse to exact rationals.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

from .graph import GraphError, SocialNetwork, TrueProfile, as_rational
from .verify.mechanisms import EXACT_ONLY, MECHANISMS

MODES = ("exact", "mc")
SINGLE_UNIT = ("pdm", "fpdm-bf", "fpdm-gbf", "fpdm-wgbf", "fpdm-bf-cp", "idm-stub")
_KEYS = ("nodes", "edges", "seller_neighbors", "valuations", "items", "mechanism", "mode", "seed", "samples")


class ScenarioError(ValueError):
    """A scenario failed validation; the message names the offending field."""


@dataclass
class Scenario:
    nodes: list
    edges: list
    seller_neighbors: list
    valuations: dict            # name -> decimal string
    items: int = 1
    mechanism: str = "fpdm-bf"
    mode: str = "exact"
    seed: int = 0
    samples: int = 10000
    ids: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.validate()

    # -- validation --------------------------------------------------------
    def validate(self) -> None:
        if not isinstance(self.nodes, list) or not self.nodes:
            raise ScenarioError("nodes: expected a non-empty list")
        for k, x in enumerate(self.nodes):
            if not isinstance(x, (str, int)) or isinstance(x, bool):
                raise ScenarioError(f"nodes[{k}]: expected a string or integer name, got {x!r}")
        if len(set(self.nodes)) != len(self.nodes):
            raise ScenarioError("nodes: duplicate names")
        self.ids = {x: k for k, x in enumerate(self.nodes)}
        for k, e in enumerate(self.edges):
            if not isinstance(e, (list, tuple)) or len(e) != 2:
                raise ScenarioError(f"edges[{k}]: expected a [from, to] pair")
            for x in e:
                if x not in self.ids:
                    raise ScenarioError(f"edges[{k}]: unknown node {x!r}")
        for k, x in enumerate(self.seller_neighbors):
            if x not in self.ids:
                raise ScenarioError(f"seller_neighbors[{k}]: unknown node {x!r}")
        missing = [x for x in self.nodes if str(x) not in self.valuations]
        if missing:
            raise ScenarioError(f"valuations: missing entries for {missing}")
        extra = set(self.valuations) - {str(x) for x in self.nodes}
        if extra:
            raise ScenarioError(f"valuations: unknown nodes {sorted(extra)}")
        for name, v in self.valuations.items():
            if not isinstance(v, str):
                raise ScenarioError(f"valuations[{name!r}]: write valuations as strings, e.g. \"0.3\"")
            try:
                q = as_rational(v)
            except GraphError as exc:
                raise ScenarioError(f"valuations[{name!r}]: {exc}") from None
            if not 0 <= q <= 1:
                raise ScenarioError(f"valuations[{name!r}]: {v} outside [0, 1]")
        if not isinstance(self.items, int) or isinstance(self.items, bool) or self.items < 1:
            raise ScenarioError("items: expected an integer >= 1")
        if self.mechanism not in MECHANISMS:
            raise ScenarioError(f"mechanism: unknown {self.mechanism!r}; choose from {', '.join(MECHANISMS)}")
        if self.mode not in MODES:
            raise ScenarioError(f"mode: expected one of {MODES}")
        if self.mode == "mc" and self.mechanism in EXACT_ONLY:
            raise ScenarioError(f"mode: {self.mechanism} is exact-only")
        if self.items > 1 and self.mechanism in SINGLE_UNIT:
            raise ScenarioError(f"items: {self.mechanism} sells a single item")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ScenarioError("seed: expected a nonnegative integer")
        if not isinstance(self.samples, int) or self.samples < 2:
            raise ScenarioError("samples: expected an integer >= 2")
        try:
            net = self.network()
        except GraphError as exc:
            raise ScenarioError(f"edges: {exc}") from None
        missing = net.unreachable()
        if missing:
            raise ScenarioError(f"network: nodes unreachable from the seller: {[self.nodes[i] for i in missing]}")

    # -- views ---------------------------------------------------------------
    def network(self) -> SocialNetwork:
        return SocialNetwork(range(len(self.nodes)), [(self.ids[a], self.ids[b]) for a, b in self.edges],
                             [self.ids[x] for x in self.seller_neighbors])

    def truth(self) -> TrueProfile:
        return TrueProfile({self.ids[x]: Fraction(self.valuations[str(x)]) for x in self.nodes})

    def name(self, i: int):
        return self.nodes[i]

    def to_dict(self) -> dict:
        return {"nodes": list(self.nodes), "edges": [list(e) for e in self.edges],
                "seller_neighbors": list(self.seller_neighbors),
                "valuations": {str(x): self.valuations[str(x)] for x in self.nodes},
                "items": self.items, "mechanism": self.mechanism, "mode": self.mode,
                "seed": self.seed, "samples": self.samples}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    @classmethod
    def from_dict(cls, doc) -> "Scenario":
        if not isinstance(doc, dict):
            raise ScenarioError("scenario: expected a JSON object")
        unknown = set(doc) - set(_KEYS)
        if unknown:
            raise ScenarioError(f"scenario: unknown fields {sorted(unknown)}")
        for key in ("nodes", "edges", "seller_neighbors", "valuations"):
            if key not in doc:
                raise ScenarioError(f"{key}: required field missing")
        if not isinstance(doc["valuations"], dict):
            raise ScenarioError("valuations: expected an object mapping node to decimal string")
        kwargs = {k: doc[k] for k in _KEYS if k in doc}
        kwargs["edges"] = [list(e) if isinstance(e, (list, tuple)) else e for e in kwargs["edges"]]
        return cls(**kwargs)

    @classmethod
    def loads(cls, text: str) -> "Scenario":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path) -> "Scenario":
        return cls.loads(Path(path).read_text())

    @classmethod
    def from_instance(cls, net: SocialNetwork, truth: TrueProfile, **kw) -> "Scenario":
        nodes = sorted(net.nodes)
        return cls(nodes, sorted([a, b] for a, b in net.edges), sorted(net.seller_neighbors),
                   {str(i): str(truth[i]) for i in nodes}, **kw)


# --------------------------------------------------------------------------
# bundled fixtures

FIXTURES = ("fig1_path", "fig2_triangle", "fig4_sybil", "fig5_inefficiency", "fig6_collusion",
            "fig7_mupdm", "fig8_spmupdm")


def fixture_path(name: str):
    return resources.files("dak") / "fixtures" / f"{name}.json"


def resolve(name_or_path: str) -> Scenario:
    """A bundled fixture by (prefix of) name, else a file path."""
    matches = [f for f in FIXTURES if f == name_or_path or f.split("_")[0] == name_or_path]
    if matches:
        return Scenario.loads(fixture_path(matches[0]).read_text())
    return Scenario.load(name_or_path)


def golden(name: str) -> Optional[str]:
    p = resources.files("dak") / "fixtures" / f"{name}.golden.json"
    return p.read_text() if p.is_file() else None

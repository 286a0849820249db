import csv
import io
import json
from fractions import Fraction as F

import pytest

from dak.cli import main
from dak.scenario import FIXTURES, Scenario, ScenarioError, golden, resolve


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_fig1(capsys):
    code, out, _ = run(capsys, "run", "fig1_path")
    doc = json.loads(out)
    assert code == 0
    assert F(doc["welfare"]) == F("0.72") and doc["revenue"] == "0"
    assert doc["audit"]["ir"] and doc["audit"]["wbb"]


def test_run_fig8(capsys):
    doc = json.loads(run(capsys, "run", "fig8")[1])
    assert F(doc["welfare"]) == F("0.41") and doc["revenue"] == "0"
    assert doc["breakdown"][0]["paths"] == [["a", "c", "d"], ["b", "e"]]


@pytest.mark.parametrize("name", FIXTURES)
def test_golden_reports(capsys, name):
    assert run(capsys, "run", name)[1] == golden(name)


def test_mc_mode_is_seeded(capsys):
    a = run(capsys, "run", "fig2", "--mode", "mc", "--samples", "2000", "--seed", "5")[1]
    b = run(capsys, "run", "fig2", "--mode", "mc", "--samples", "2000", "--seed", "5")[1]
    c = run(capsys, "run", "fig2", "--mode", "mc", "--samples", "2000", "--seed", "6")[1]
    assert a == b != c
    doc = json.loads(a)
    lo, hi = doc["welfare"]["ci99"]
    assert lo <= float(F(129, 200)) <= hi


def test_breakdown_csv(capsys, tmp_path):
    path = tmp_path / "b.csv"
    run(capsys, "run", "fig2", "--breakdown", str(path))
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert rows[0][0] == "case" and len(rows) == 3


def test_exit_codes(capsys, tmp_path, monkeypatch):
    bad = tmp_path / "bad.json"
    bad.write_text('{"nodes": ["a"],\n "edges": [}')
    code, _, err = run(capsys, "run", str(bad))
    assert code == 1 and "line 2" in err
    bad.write_text(json.dumps({"nodes": ["a"], "edges": [], "seller_neighbors": ["a"],
                               "valuations": {"a": "1.5"}}))
    code, _, err = run(capsys, "run", str(bad))
    assert code == 1 and "valuations" in err
    assert run(capsys, "run", str(tmp_path / "missing.json"))[0] == 4
    assert run(capsys, "bogus")[0] == 1
    assert run(capsys, "verify", "--scenario", "fig2", "--suite", "nope")[0] == 1
    assert run(capsys, "sweep", "--count", "1")[0] == 1
    monkeypatch.setenv("DAK_EXACT_CAP", "2")
    code, _, err = run(capsys, "run", "fig2")
    assert code == 2 and "Monte Carlo" in err
    code, _, _ = run(capsys, "run", "fig2", "--mode", "mc", "--samples", "100")
    assert code == 0


def test_exact_only_mechanisms_reject_mc(capsys):
    assert run(capsys, "run", "fig4", "--mode", "mc")[0] == 1


def test_verify_expected_failure(capsys):
    code, out, _ = run(capsys, "verify", "--scenario", "fig8", "--mech", "mupdm", "--suite", "sybil")
    doc = json.loads(out)
    res = doc["suites"]["sybil"]
    assert code == 0 and res["expected"] == "fail" and res["ok"]
    assert "e" in res["results"][0]["profitable"]


def test_verify_failure_exit(capsys):
    code, out, _ = run(capsys, "verify", "--scenario", "fig6", "--mech", "fpdm-bf", "--suite", "cp",
                       "--cp-values", "instance")
    assert code == 3 and json.loads(out)["ok"] is False


def test_verify_passes(capsys):
    code, _, _ = run(capsys, "verify", "--scenario", "fig6", "--suite", "basic,cp,eff,rev",
                     "--cp-values", "instance")
    assert code == 0
    code, _, _ = run(capsys, "verify", "--random", "4", "3", "--mech", "fpdm-gbf", "--suite", "ic", "--seed", "2")
    assert code == 0


def test_gen_round_trip(capsys, tmp_path):
    out = tmp_path / "g.json"
    assert run(capsys, "gen", "gnp-connected", "6", "0.4", "--seed", "1", "--out", str(out))[0] == 0
    s = Scenario.load(out)
    assert not s.network().unreachable()
    assert Scenario.loads(s.dumps()) == s
    assert s.dumps() == out.read_text()
    again = run(capsys, "gen", "gnp-connected", "6", "0.4", "--seed", "1")[1]
    assert again == out.read_text()


def test_gen_path(capsys):
    s = Scenario.loads(run(capsys, "gen", "path", "4", "--seed", "7")[1])
    assert len(s.nodes) == 4 and len(s.edges) == 3


def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--gen", "tree", "--count", "20", "--mech", "fpdm-bf",
                       "--metrics", "welfare,floor_margin")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 20
    assert all(F(r["fpdm-bf:floor_margin"]) >= 0 for r in rows)
    code, out, _ = run(capsys, "sweep", "--gen", "layered", "--count", "5", "--mech", "mupdm,spmupdm",
                       "--items", "2", "--metrics", "revenue")
    assert all(F(x) >= 0 for r in csv.DictReader(io.StringIO(out)) for x in r.values() if "/" in x or x == "0")


def test_scenario_validation():
    base = resolve("fig2").to_dict()
    for key, value, field in [("mechanism", "vcg", "mechanism"), ("items", 0, "items"),
                              ("edges", [["a", "z"]], "edges[0]"), ("valuations", {"a": 0.3}, "valuations")]:
        with pytest.raises(ScenarioError, match=field.replace("[", r"\[").replace("]", r"\]")):
            Scenario.from_dict({**base, key: value})
    with pytest.raises(ScenarioError, match="single item"):
        Scenario.from_dict({**base, "mechanism": "fpdm-bf", "items": 2})


def test_exact_numbers_reparse(capsys):
    doc = json.loads(run(capsys, "run", "fig7")[1])
    assert F(doc["welfare"]) == F("0.885") and F(doc["revenue"]) == F("0.2025")
    for b in doc["buyers"].values():
        F(b["utility"])


def test_revenue_suite_scope(capsys):
    code, out, _ = run(capsys, "verify", "--random", "4", "10", "--mech", "fpdm-bf", "--suite", "rev", "--seed", "4")
    assert code == 0
    code, out, _ = run(capsys, "verify", "--scenario", "fig6", "--suite", "rev")
    assert code == 0 and json.loads(out)["suites"]["rev"]["results"][0]["skipped"]

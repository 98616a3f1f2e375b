import json

import pytest

from macbounds.suites import RUNNERS, SUITES, SuiteResult, run_suite


@pytest.mark.parametrize("name", SUITES)
def test_small_runs_pass(name):
    res = run_suite(name, seed=7, count=4)
    assert res.passed and res.count == 4 and res.checks > 0


@pytest.mark.parametrize("name", ["theorem1", "quantum-classical", "eq74"])
def test_same_seed_same_body(name):
    a = json.dumps(run_suite(name, 11, 3).body(), sort_keys=True)
    b = json.dumps(run_suite(name, 11, 3).body(), sort_keys=True)
    assert a == b


def test_every_suite_has_a_runner():
    assert set(RUNNERS) == set(SUITES)


def test_failures_keep_instance():
    res = SuiteResult("x", 0, 1)
    res.check(0.5, 1e-9, {"id": 1}, "fine")
    res.check(-1e-3, 1e-9, {"id": 2}, "broken")
    res.check_many([0.1, -0.2, -0.3], 1e-9, {"id": 3}, "many")
    body = res.body()
    assert body["checks"] == 5 and body["failed"] == 3 and not body["passed"]
    assert [f["instance"]["id"] for f in body["failures"]] == [2, 3]
    assert body["min_slack"] == -0.3
    assert "wall" not in json.dumps(body)

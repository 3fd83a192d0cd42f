import pytest

from thornlab import suites
from thornlab.suites import SUITES, verify_suite

QUICK = sorted(set(SUITES) - {"oracle-agreement"})


@pytest.mark.parametrize("name", QUICK)
def test_small_run_passes(name):
    r = verify_suite(name, seed=11, count=1)
    assert r.ok, r.first_failure
    assert r.passed > 0 and r.first_failure is None


def test_unknown_suite_and_bad_count():
    with pytest.raises(KeyError):
        verify_suite("no-such-suite")
    with pytest.raises(ValueError):
        verify_suite("symmetry", count=0)


def test_seed_determines_instances():
    a = verify_suite("symmetry", seed=3, count=3).to_dict()
    b = verify_suite("symmetry", seed=3, count=3).to_dict()
    assert a == b


def test_wrong_oracle_is_caught(monkeypatch):
    monkeypatch.setattr(suites, "oracle_indep", lambda *args: "never")
    r = verify_suite("symmetry", seed=1, count=2)
    assert not r.ok
    assert r.first_failure["property"] == "matches_oracle"
    assert {"a", "b", "base", "theory"} <= set(r.first_failure)

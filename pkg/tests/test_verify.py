import pytest

from povmfid.verify import SUITES, run_suite


@pytest.mark.parametrize("suite", sorted(SUITES))
def test_suites_pass(suite):
    r = run_suite(suite, seed=3, trials=20)
    assert r.ok, r.checks
    assert r.as_dict()["passed"] is True


def test_deterministic():
    assert run_suite("bounds", seed=1, trials=6).as_dict() == run_suite("bounds", seed=1, trials=6).as_dict()


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")


def test_failure_recorded():
    r = run_suite("table1", trials=1)
    r.record("forced", False, 1.0)
    assert not r.ok and r.checks["forced"]["worst"] == 1.0

"""Plumbing of the invariant-suite runner; the suites themselves are
exercised at full size by the acceptance tests."""

import pytest

from qrdkit.validate import SUITES, SuiteResult, run_suites, suite_band


def test_unknown_suite_is_rejected():
    with pytest.raises(ValueError, match="unknown suite"):
        run_suites("nope", seed=1)


def test_duplicate_names_run_once():
    names = [r.name for r in run_suites(["band", "step5", "band"], seed=3)]
    assert names == ["band", "step5"]


def test_suite_result_ok_flag():
    good = SuiteResult("x", 5, 5)
    bad = SuiteResult("x", 4, 5, ("miss",))
    assert good.ok and not bad.ok
    assert bad.to_dict()["failures"] == ["miss"]


def test_registry_covers_all_suites():
    assert set(SUITES) == {"lemma1", "np_sdp", "lemma7", "lemma13", "step5",
                           "band", "properties", "smoothing_order"}


def test_band_suite_is_seeded():
    a = suite_band(7)
    b = suite_band(7)
    assert a == b and a.ok

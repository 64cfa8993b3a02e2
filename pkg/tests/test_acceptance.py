"""One test per acceptance criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (shown even without
``-s``) and then asserts the result, so an unmet criterion fails here too.
"""
import pytest

from trapwave.acceptance import CHECKS


@pytest.fixture(scope="module")
def cache():
    # the d=7 branch sweep is shared between two criteria
    return {}


@pytest.mark.slow
@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{c.number:02d}" for c in CHECKS])
def test_criterion(check, cache, capsys):
    res = check(cache)
    with capsys.disabled():
        print("\n" + res.line(), flush=True)
    assert res.passed, res.detail

"""Acceptance battery, one test per criterion.

Each criterion function returns (passed, detail); the parametrization
below turns that into one pass/fail line per criterion.  Runtime budgets
are asserted where the criterion carries one.
"""

import time

import pytest

from varjump import acceptance

_BUDGET_SECONDS = {1: 60.0, 4: 120.0, 6: 60.0}

_IDS = [f"{num:02d}_{name.replace(' ', '_').replace('-', '_')}"
        for num, name, _ in acceptance.CRITERIA]


@pytest.mark.parametrize("number,name,check", acceptance.CRITERIA, ids=_IDS)
def test_criterion(number, name, check):
    start = time.monotonic()
    passed, detail = check()
    elapsed = time.monotonic() - start
    assert passed, f"criterion {number} ({name}): {detail}"
    budget = _BUDGET_SECONDS.get(number)
    if budget is not None:
        assert elapsed < budget, (
            f"criterion {number} took {elapsed:.1f}s, budget {budget:.0f}s")


def test_run_all_selection():
    results = acceptance.run_all([2])
    assert [r.number for r in results] == [2]
    assert results[0].passed, results[0].detail
    assert results[0].name == "monotonicity"
    assert results[0].seconds > 0.0

"""One test per acceptance criterion, at the stated tolerances.

Each test prints a PASS/FAIL line; the lines are also collected into a
summary section at the end of the pytest run.  Set THINFRAC_BUDGET=quick to
use smaller Monte Carlo budgets (tolerances are unchanged).
"""
import os

import pytest

from thinfrac.acceptance import CRITERIA

BUDGET = os.environ.get("THINFRAC_BUDGET", "full")


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, acceptance_log):
    result = CRITERIA[number](BUDGET)
    line = result.line()
    print(line)
    acceptance_log.append(line)
    for c in result.checks:
        print(f"    {'ok ' if c.passed else 'BAD'} {c.name}: {c.value:.6g} (target {c.target:.6g}, tol {c.tolerance:g})")
    assert result.passed, line

"""Acceptance criteria 1-11; one PASS/FAIL line per criterion in the terminal summary."""
import pytest

from heatcut.acceptance import CRITERIA, run_criterion

LINES = []


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    res = run_criterion(number)
    LINES.append(res.line())
    print(res.line())
    assert res.seconds <= res.budget, f"criterion {number} took {res.seconds:.1f}s > {res.budget}s"
    assert res.passed, res.detail

"""Acceptance gate: the nine cross-validation criteria at the reference point.

Each test runs one criterion of the validation suite at full scale and prints a
single PASS/FAIL line; failures list the offending sub-checks with their pinned
tolerances.
"""
import pytest

from aoiq import validation


@pytest.mark.parametrize("label,fn", validation.CRITERIA,
                         ids=[label.replace(" ", "_") for label, _ in validation.CRITERIA])
def test_criterion(label, fn, capsys):
    checks = fn(quick=False)
    ok = all(c.passed for c in checks)
    with capsys.disabled():
        print(f"{'PASS' if ok else 'FAIL'}  criterion {label} "
              f"({sum(c.passed for c in checks)}/{len(checks)} checks)")
    if not ok:
        detail = "\n".join(
            f"  {c.name}: expected={c.expected!r} observed={c.observed!r} "
            f"tolerance={c.tolerance}" for c in checks if not c.passed)
        pytest.fail(f"criterion {label} failed:\n{detail}")

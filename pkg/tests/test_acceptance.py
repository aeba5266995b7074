"""Acceptance gate: one test per release criterion, at the pinned tolerances.

Each test calls the corresponding check in splitbell.acceptance, which owns
the tolerance constants, and fails with the measured-vs-allowed table of any
subcheck that missed.  The checks share one preparation cache, so the suite
prepares each (r, k_cut) state exactly once; expect several minutes of
runtime dominated by the large-cutoff preparations and the six-mode model.
"""

import pytest

from splitbell import acceptance

EXPECTED_ORDER = list(range(1, len(acceptance.ALL_CHECKS) + 1))

_cases = list(zip(EXPECTED_ORDER, acceptance.ALL_CHECKS))
_ids = [f"criterion_{num}_{fn.__name__.removeprefix('check_')}" for num, fn in _cases]


def _describe(result):
    lines = [f"criterion {result.criterion} ({result.title}) "
             f"{'passed' if result.passed else 'FAILED'} in {result.elapsed_s:.1f}s"]
    for sub in result.subchecks:
        flag = "ok  " if sub.passed else "FAIL"
        lines.append(f"  [{flag}] {sub.name}: measured {sub.measured}, allowed {sub.tolerance}")
    return "\n".join(lines)


@pytest.mark.parametrize("number,check", _cases, ids=_ids)
def test_criterion(number, check):
    result = check()
    print(_describe(result))
    assert result.criterion == number
    assert result.passed, _describe(result)

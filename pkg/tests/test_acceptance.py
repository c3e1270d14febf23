"""Acceptance criteria 1-11, one test each.

Each criterion prints a ``[PASS]`` or ``[FAIL]`` line (collected in the pytest
terminal summary, or printed directly when run as a script).
"""
import sys

import pytest

from hyperperc.acceptance import CHECKS, run_check

SEED = 0
RESULTS = {}


@pytest.mark.slow
@pytest.mark.parametrize("k", sorted(CHECKS))
def test_criterion(k):
    r = run_check(k, seed=SEED)
    RESULTS[k] = r
    print(r.line())
    assert r.passed, r.details


if __name__ == "__main__":
    ok = True
    for k in sorted(CHECKS):
        r = run_check(k, seed=SEED)
        print(r.line(), flush=True)
        ok &= r.passed
    sys.exit(0 if ok else 1)

"""Acceptance criteria, one test each; every test prints its report line.

Criterion 8 (general vs high-power gap at 40 dB) and criterion 9 (dynamic
capacity above the -5 dB fixed baseline at λ_p = 6) fail for the model as
specified; their report lines show the measured values.
"""

import pytest

from dynit.experiments.acceptance import CRITERIA, AcceptanceContext


@pytest.fixture(scope="module")
def ctx():
    return AcceptanceContext()


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda fn: fn.__name__)
def test_criterion(criterion, ctx, capsys):
    result = criterion(ctx)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()

"""Every acceptance criterion at its stated tolerance and full sample size.

Each test prints one PASS/FAIL line (outside pytest's capture) so the run
log doubles as the acceptance report.
"""

import pytest

from forestfire import acceptance


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda c: c.__name__)
def test_criterion(criterion, capsys):
    result = criterion(quick=False)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail

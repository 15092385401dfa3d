import pytest

from planarpot.verify import ACCEPTANCE, run_check


@pytest.mark.parametrize("check_id", sorted(ACCEPTANCE))
def test_acceptance_criterion(check_id, acceptance_lines):
    result = run_check(check_id)
    line = result.line() + (f" {result.detail}" if result.detail else "")
    acceptance_lines[check_id] = line
    print(line)
    assert result.status == "pass", line

"""Exit gate: one PASS/FAIL line per acceptance criterion."""
import pytest

from qdrinfeld import acceptance

_results: dict = {}


def _result(number: int):
    if number not in _results:
        _results[number] = acceptance.run_criterion(acceptance.CRITERIA[number - 1])
    return _results[number]


def _report(capsys, res):
    with capsys.disabled():
        print(f"\n{res.line()} ({res.seconds:.1f}s)")


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(number, capsys):
    res = _result(number)
    _report(capsys, res)
    assert res.passed, res.detail
    if number == 10:
        assert res.seconds < 15 * 60
    if number == 11:
        assert res.seconds < 1.0


def test_criterion_12_precision_stability(capsys):
    base = [_result(n) for n in range(1, 12)]
    res = acceptance.stability(base)
    _report(capsys, res)
    assert res.passed, res.detail

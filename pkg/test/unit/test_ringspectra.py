import pytest

from ringspectra import ringspectra, verify
from ringspectra.charpoly import LAMBDA, FactoredPoly


def _exit_code(argv: list[str]) -> int:
    with pytest.raises(SystemExit) as excinfo:
        ringspectra.main(argv)
    return excinfo.value.code


def test_exit_codes(monkeypatch, capsys):
    assert _exit_code(["verify", "zn:4", "1"]) == 0
    assert _exit_code(["verify", "zn:0", "1"]) == 2

    real_verify_instance = verify.verify_instance

    def failing_trace(ring, u, options=None):
        report = real_verify_instance(ring, u, options)
        report.aux_checks["trace"] = False
        return report

    monkeypatch.setattr(ringspectra, "verify_instance", failing_trace)
    # the prediction still matches, only an auxiliary check fails
    assert _exit_code(["verify", "zn:4", "1"]) == 3

    monkeypatch.setattr(verify, "predict", lambda case: FactoredPoly(1, ((LAMBDA, 4),)))
    assert _exit_code(["verify", "zn:4", "1"]) == 1
    capsys.readouterr()

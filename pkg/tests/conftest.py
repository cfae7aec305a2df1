import numpy as np
import pytest

_CRITERIA = {}


def record_criterion(number, label, passed, detail=""):
    _CRITERIA[number] = (label, bool(passed), detail)
    print(f"[criterion {number}] {'PASS' if passed else 'FAIL'} {label} {detail}".rstrip())


@pytest.fixture
def criterion():
    return record_criterion


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: (int("".join(c for c in str(k) if c.isdigit())), str(k))):
        label, ok, detail = _CRITERIA[key]
        terminalreporter.write_line(f"{key:>4} {'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())

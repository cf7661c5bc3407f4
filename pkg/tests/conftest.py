import os

import numpy as np
import pytest


def _seed() -> int:
    return int(os.environ.get("FREQLAB_SEED", "20240917"))


@pytest.fixture
def rng():
    return np.random.default_rng(_seed())


def pytest_report_header(config):
    return f"FREQLAB_SEED={_seed()}"


_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance[report.nodeid.split("::")[-1]] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance, key=lambda s: int(s.split("_")[2])):
        terminalreporter.write_line(f"{_acceptance[name]}  {name}")

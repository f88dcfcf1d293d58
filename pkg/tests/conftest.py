import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gamowkit import EnergyGrid, PoleSpec  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"

_acceptance: dict[str, tuple[str, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def golden_dir():
    return GOLDEN


@pytest.fixture
def wide_grid():
    return EnergyGrid(-40.0, 40.0, 4096)


@pytest.fixture
def pole1():
    return PoleSpec(10.0, 1.0, 1)


@pytest.fixture
def pole2():
    return PoleSpec(10.0, 1.0, 2)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    number = name.split("_")[2]
    title = " ".join(name.split("_")[3:])
    _acceptance[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, status = _acceptance[number]
        terminalreporter.write_line(f"criterion {int(number):2d} [{status}] {title}")

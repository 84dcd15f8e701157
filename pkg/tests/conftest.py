"""Shared fixtures and hypothesis profile."""

from __future__ import annotations

import math

import pytest
from hypothesis import HealthCheck, settings

from cesaro_lab.funcspace import default_grid

settings.register_profile(
    "cesaro",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("cesaro")


@pytest.fixture(scope="session")
def grid():
    return default_grid(1024)


@pytest.fixture(scope="session")
def grid_fine():
    return default_grid(4096)


@pytest.fixture(scope="session")
def grid_cut():
    """Grid with a breakpoint at e^{-1}, where S(1) and T(1) jump."""
    return default_grid(2048, breakpoints=(math.exp(-1.0),))


_ACCEPTANCE_LINES: list[str] = []


def pytest_runtest_logreport(report):
    if report.when == "call":
        _ACCEPTANCE_LINES.extend(v for k, v in report.user_properties if k == "acceptance")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

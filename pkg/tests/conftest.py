"""Shared fixtures: a small gain table, and the acceptance line reporter."""

from __future__ import annotations

import pytest

from caccsim.gaintable import AxisGrid, BuildConfig, CandidateSets, build_table

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collector for the per-criterion verdict lines."""

    def record(line: str) -> None:
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.line(line)


@pytest.fixture(scope="session")
def tiny_axes():
    return AxisGrid(dr=[10.0, 20.0], vi=[10.0, 14.0], vj=[10.0, 14.0])


@pytest.fixture(scope="session")
def tiny_candidates():
    return CandidateSets(gammas=[2.0, 5.0], ks=[0.1])


@pytest.fixture(scope="session")
def tiny_cfg():
    return BuildConfig(t_max=60.0)


@pytest.fixture(scope="session")
def tiny_table(tiny_axes, tiny_candidates, tiny_cfg):
    return build_table(tiny_axes, tiny_candidates, tiny_cfg)

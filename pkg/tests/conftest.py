from pathlib import Path

import pytest

from vgadequacy.synth import FixtureSpec, write_fixture

TINY_DEMAND = """timestamp,demand_mw,winter_id
2005-11-06T00:00:00Z,5,2005-06
2005-11-13T00:00:00Z,15,2005-06
2005-11-20T00:00:00Z,25,2005-06
2005-11-27T00:00:00Z,35,2005-06
"""
TINY_WIND = """timestamp,load_factor
2005-11-06T00:00:00Z,0.5
2005-11-13T00:00:00Z,0.0
2005-11-20T00:00:00Z,1.0
2005-11-27T00:00:00Z,0.2
"""
TINY_UNITS = "name,capacity_mw,availability\nA,10,0.9\nB,20,0.8\n"
TINY_CONFIG = """data: {demand_csv: demand.csv, wind_csv: wind.csv, units_csv: units.csv}
scenario: {response_adjustment_mw: 0, installed_wind_mw: [0]}
season: {weeks_per_winter: 4}
"""


@pytest.fixture(scope="session")
def gb_config(tmp_path_factory) -> Path:
    """Full-size synthetic GB-like fixture: 7 winters x 20 weeks, hourly."""
    return write_fixture(tmp_path_factory.mktemp("gb"), FixtureSpec(), seed=0)


@pytest.fixture(scope="session")
def small_config(tmp_path_factory) -> Path:
    """Same layout at a 6-hour cadence, for fast command tests."""
    return write_fixture(tmp_path_factory.mktemp("small"), FixtureSpec(cadence_hours=6), seed=0,
                         capacities=[0.0, 10000.0, 30000.0])


@pytest.fixture
def tiny_config(tmp_path) -> Path:
    """Two units and four weekly records."""
    (tmp_path / "demand.csv").write_text(TINY_DEMAND)
    (tmp_path / "wind.csv").write_text(TINY_WIND)
    (tmp_path / "units.csv").write_text(TINY_UNITS)
    path = tmp_path / "config.yaml"
    path.write_text(TINY_CONFIG)
    return path


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion; returns the verdict."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def emit(criterion: int, passed: bool, detail: str) -> bool:
        line = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append((criterion, line))
        print(line)
        return passed

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)

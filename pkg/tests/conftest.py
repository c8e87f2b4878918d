from __future__ import annotations

import pytest

from sbo_risk import catalog
from sbo_risk.scenario_io import parse_scenario
from sbo_risk.threat_model import DefenseStack, RiskParams, Scenario, ThreatPopulation

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def paper_scenario() -> Scenario:
    return parse_scenario("paper-8-1")


@pytest.fixture
def paper_stack() -> DefenseStack:
    return DefenseStack(tuple(catalog.lookup(n).measure for n in catalog.PAPER_STACK_NAMES))


def small_scenario(stack=DefenseStack(), *, worms=0, bots=0, skids=0, hackers=0,
                   baseline_time_hours=10.0, baseline_population=1, epoch_hours=None) -> Scenario:
    return Scenario(
        population=ThreatPopulation.of(worms, bots, skids, hackers),
        stack=stack,
        baseline_time_hours=baseline_time_hours,
        baseline_population=baseline_population,
        risk=RiskParams(1.0, 1000.0, 0.5),
        epoch_hours=epoch_hours,
    )


@pytest.fixture
def record_criterion():
    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

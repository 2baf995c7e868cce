from __future__ import annotations

import functools
from dataclasses import replace

import pytest
from hypothesis import HealthCheck, settings

from mmcfrt import FaultSpec, InvariantViolation, Scenario, run
from mmcfrt.cli import bundled_scenario
from mmcfrt.scenario import load_scenario

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# Acceptance lines collected during the session and printed in the summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def reference(name: str) -> Scenario:
    return load_scenario(bundled_scenario(name))


@functools.lru_cache(maxsize=None)
def cached_run(key: str):
    """Runs shared across test modules. An abort is returned, not raised."""
    lllg, slg = reference("lllg"), reference("slg")
    variants = {
        "lllg": lllg,
        "slg": slg,
        "nofault": Scenario(fault=FaultSpec(), t_end_s=10.0),
        "lllg_no_energy_control": replace(lllg, energy_control_enabled=False),
        "lllg_no_control_no_edd": replace(lllg, energy_control_enabled=False, edd_enabled=False),
        "lllg_half_dt": replace(lllg, dt_s=lllg.dt_s / 2, log_decimation=2 * lllg.log_decimation),
        "slg_half_dt": replace(slg, dt_s=slg.dt_s / 2, log_decimation=2 * slg.log_decimation),
    }
    try:
        return run(variants[key])
    except InvariantViolation as exc:
        return exc


@pytest.fixture(scope="session")
def runs():
    return cached_run

"""Shared fixtures: cached runs of the built-in scenarios and overrides."""
from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from wiredrive.cli import apply_overrides
from wiredrive.engine import run
from wiredrive.model import Scenario, scenario_from_dict, scenario_to_dict
from wiredrive.scenarios import builtin_scenario

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
    deadline=None,
)
settings.load_profile("suite")


def scenario_variant(name: str, overrides: dict) -> Scenario:
    """Built-in scenario with dotted-key overrides applied."""
    doc = scenario_to_dict(builtin_scenario(name))
    apply_overrides(doc, list(overrides.items()))
    return scenario_from_dict(doc)


@pytest.fixture(scope="session")
def pull_up_run():
    """One full pull-up run shared by every test that inspects it."""
    return run(builtin_scenario("pull_up"))


@pytest.fixture(scope="session")
def rising_run():
    """One full rising-from-prone run (the longest scenario)."""
    return run(builtin_scenario("rising"))


@pytest.fixture(scope="session")
def kick_run():
    """One full mid-air-kick run."""
    return run(builtin_scenario("kick"))

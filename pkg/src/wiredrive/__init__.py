"""Deterministic simulator for a wire-driven humanoid on environment anchors.

A humanoid body carrying a winch cube is suspended from wires anchored to
the environment (ceiling, frame) or looped back onto its own body.  Wire
lengths are the actuated quantity: a PD law on measured length plus a
gravity-compensation feedforward produces per-wire tension commands, and a
floating-base rigid-body integrator advances the pose.  Scenarios script
phased motions (pull-up, rising from prone, mid-air kick) and produce CSV
trajectory logs.
"""

from .model import (
    Scenario,
    ScenarioError,
    load_scenario,
    serialize_scenario,
    validate_scenario,
)
from .planner import builtin_scenario, builtin_scenario_names
from .engine import run, emit_csv, emit_plots

__version__ = "0.1.0"

__all__ = [
    "Scenario",
    "ScenarioError",
    "load_scenario",
    "serialize_scenario",
    "validate_scenario",
    "builtin_scenario",
    "builtin_scenario_names",
    "run",
    "emit_csv",
    "emit_plots",
    "__version__",
]

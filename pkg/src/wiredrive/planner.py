"""Phase-scripted motion planning with two synchronized planners.

Two planners run on the same clock.  The posture planner owns the joint
trajectory; it advances through the phase list on nominal time and
announces each phase start with a SyncMessage.  The wire planner owns
wire length references and compensation sets; a phase marked
``sync_barrier`` is not entered until the announcement for that phase
index has been received.  Delivery is deterministic: a message emitted
at one tick becomes visible at the next, so a barrier costs exactly one
tick.  While waiting, the wire planner extends the current phase's
terminal values (completed ramps hold).

Wire targets inside a phase are a signed length change ramped linearly
over the phase (``ramp``), a frozen reference (``hold``), or ``track``:
the reference follows the measured length so the wire applies no force,
and a later ramp re-anchors at the measured boundary value.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .model import HOLD, TRACK, Phase, Scenario
from .scenarios import builtin_scenario, builtin_scenario_names  # re-export

__all__ = [
    "SyncMessage",
    "WireMode",
    "CompiledPlan",
    "compile_plan",
    "PlannerTick",
    "WirePlanner",
    "PosturePlanner",
    "DualPlanner",
    "builtin_scenario",
    "builtin_scenario_names",
]

_EDGE_TOL = 1e-12  # phase boundary comparison slack, far below any dt


@dataclass(frozen=True)
class SyncMessage:
    sender: str
    phase_index: int
    timestamp: float


@dataclass(frozen=True)
class WireMode:
    """Behavior of one wire during one phase."""

    mode: str            # "ramp" | "hold" | "track"
    delta: float = 0.0   # signed length change for ramps


@dataclass(frozen=True)
class CompiledPlan:
    phases: tuple[Phase, ...]
    boundaries: tuple[float, ...]            # cumulative start times + total
    wire_ids: tuple[int, ...]
    initial_lengths: Mapping[int, float]
    wire_modes: Mapping[int, tuple[WireMode, ...]]
    joint_nodes: Mapping[str, tuple[float, ...]]  # values at each boundary

    @property
    def total_duration(self) -> float:
        return self.boundaries[-1]

    def phase_index_at(self, t: float) -> int:
        if t <= 0.0:
            return 0
        idx = bisect.bisect_right(self.boundaries, t + _EDGE_TOL) - 1
        return min(idx, len(self.phases) - 1)

    def theta_at(self, t: float) -> dict[str, float]:
        """Joint references: linear within each phase, clamped outside."""
        idx = self.phase_index_at(t)
        t0, t1 = self.boundaries[idx], self.boundaries[idx + 1]
        frac = 0.0 if t1 <= t0 else min(max((t - t0) / (t1 - t0), 0.0), 1.0)
        out = {}
        for name, nodes in self.joint_nodes.items():
            a, b = nodes[idx], nodes[idx + 1]
            out[name] = a + (b - a) * frac
        return out

    def l_ref_at(self, wire_id: int, t: float) -> float:
        """Nominal length reference, defined only along track-free history."""
        idx = self.phase_index_at(t)
        value = float(self.initial_lengths[wire_id])
        modes = self.wire_modes[wire_id]
        for k in range(idx):
            seg = modes[k]
            if seg.mode == TRACK:
                raise ValueError(
                    f"wire {wire_id}: nominal reference after a '{TRACK}' phase "
                    "depends on the measured length at run time")
            if seg.mode == "ramp":
                value += seg.delta
        seg = modes[idx]
        if seg.mode == TRACK:
            raise ValueError(
                f"wire {wire_id}: phase {idx} tracks the measured length")
        if seg.mode == "ramp":
            t0, t1 = self.boundaries[idx], self.boundaries[idx + 1]
            frac = min(max((t - t0) / (t1 - t0), 0.0), 1.0)
            value += seg.delta * frac
        return value

    def compensation_at(self, t: float) -> tuple[int, ...]:
        return self.phases[self.phase_index_at(t)].compensation


def compile_plan(phases: Sequence[Phase],
                 initial_lengths: Mapping[int, float],
                 initial_joints: Mapping[str, float]) -> CompiledPlan:
    """Resolve the phase list into per-wire modes and joint boundary values."""
    boundaries = [0.0]
    for phase in phases:
        boundaries.append(boundaries[-1] + phase.duration)

    wire_ids = tuple(sorted(initial_lengths))
    wire_modes: dict[int, tuple[WireMode, ...]] = {}
    for wid in wire_ids:
        modes = []
        for phase in phases:
            target = phase.wire_targets.get(wid, HOLD)
            if target == TRACK:
                modes.append(WireMode(TRACK))
            elif target == HOLD:
                modes.append(WireMode(HOLD))
            else:
                modes.append(WireMode("ramp", float(target)))
        wire_modes[wid] = tuple(modes)

    joint_nodes: dict[str, tuple[float, ...]] = {}
    for name, start in initial_joints.items():
        nodes = [float(start)]
        for phase in phases:
            nodes.append(float(phase.joint_targets.get(name, nodes[-1])))
        joint_nodes[name] = tuple(nodes)

    return CompiledPlan(
        phases=tuple(phases),
        boundaries=tuple(boundaries),
        wire_ids=wire_ids,
        initial_lengths=dict(initial_lengths),
        wire_modes=wire_modes,
        joint_nodes=joint_nodes,
    )


@dataclass(frozen=True)
class PlannerTick:
    t: float
    phase_index: int
    phase_name: str
    l_ref: Mapping[int, float]
    track: frozenset[int]
    compensation: tuple[int, ...]
    waiting: bool


class WirePlanner:
    """Runtime evaluator for the wire side of a compiled plan."""

    def __init__(self, plan: CompiledPlan):
        self.plan = plan
        self.index = 0
        self.entered_at = 0.0
        self.anchors = {wid: float(v) for wid, v in plan.initial_lengths.items()}
        self.announced = -1

    def tick(self, t: float, inbox: Sequence[SyncMessage],
             measured: Mapping[int, float]) -> PlannerTick:
        for msg in inbox:
            if msg.phase_index > self.announced:
                self.announced = msg.phase_index

        plan = self.plan
        waiting = False
        while True:
            phase = plan.phases[self.index]
            if (t - self.entered_at < phase.duration - _EDGE_TOL
                    or self.index == len(plan.phases) - 1):
                break
            nxt = self.index + 1
            if plan.phases[nxt].sync_barrier and self.announced < nxt:
                waiting = True
                break
            # close out the finished phase: ramps land exactly on their sum
            for wid in plan.wire_ids:
                seg = plan.wire_modes[wid][self.index]
                if seg.mode == "ramp":
                    self.anchors[wid] += seg.delta
                elif seg.mode == TRACK:
                    self.anchors[wid] = float(measured[wid])
            nominal = self.entered_at + phase.duration
            self.entered_at = nominal if t <= nominal + _EDGE_TOL else t
            self.index = nxt

        phase = plan.phases[self.index]
        elapsed = min(max(t - self.entered_at, 0.0), phase.duration)
        frac = elapsed / phase.duration
        l_ref: dict[int, float] = {}
        track = set()
        for wid in plan.wire_ids:
            seg = plan.wire_modes[wid][self.index]
            if seg.mode == TRACK:
                l_ref[wid] = float(measured[wid])
                track.add(wid)
            elif seg.mode == "ramp":
                l_ref[wid] = self.anchors[wid] + seg.delta * frac
            else:
                l_ref[wid] = self.anchors[wid]
        return PlannerTick(
            t=t,
            phase_index=self.index,
            phase_name=phase.name,
            l_ref=l_ref,
            track=frozenset(track),
            compensation=phase.compensation,
            waiting=waiting,
        )


class PosturePlanner:
    """Advances on nominal time and announces each phase start."""

    def __init__(self, plan: CompiledPlan, sender: str = "posture"):
        self.plan = plan
        self.sender = sender
        self._next = 0

    def tick(self, t: float) -> list[SyncMessage]:
        out = []
        while (self._next < len(self.plan.phases)
               and t >= self.plan.boundaries[self._next] - _EDGE_TOL):
            out.append(SyncMessage(self.sender, self._next, t))
            self._next += 1
        return out

    def theta_at(self, t: float) -> dict[str, float]:
        return self.plan.theta_at(t)


class DualPlanner:
    """Couples the two planners with next-tick message delivery."""

    def __init__(self, plan: CompiledPlan):
        self.plan = plan
        self.wire = WirePlanner(plan)
        self.posture = PosturePlanner(plan)
        self._pending: list[SyncMessage] = []
        self.emitted: list[SyncMessage] = []

    def tick(self, t: float, measured: Mapping[int, float]) -> PlannerTick:
        inbox = self._pending
        self._pending = self.posture.tick(t)
        self.emitted.extend(self._pending)
        return self.wire.tick(t, inbox, measured)

    def theta_at(self, t: float) -> dict[str, float]:
        return self.plan.theta_at(t)

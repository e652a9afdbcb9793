"""Scenario execution: the tick loop, trajectory logging, CSV and plots.

``run`` advances the simulation on a fixed grid t = k * dt, logging one
record per tick.  Each tick evaluates the planners, distributes the
body weight over the active compensation wires, forms PD tension
commands, and integrates one step.  Wires in track mode command exactly
zero tension; their reference follows the measured length.

The CSV contract is frozen: the header is always

    t,x,y,z,roll,pitch,yaw,l0..l7,fref0..fref7,iref0..iref7,phase,events

with all eight wire slots present whether or not a wire exists (absent
wires log zeros).  Floats are written with ``repr`` so parsing returns
the exact binary values, and two runs of the same scenario produce
byte-identical files.  By default rows are decimated to 100 Hz; events
from skipped ticks are carried onto the next emitted row so none are
lost.  Event strings are ``TouchDown:<segment>.<point>`` on first
ground contact of each contact point and ``KickContact:<segment>.
<point>:<speed>`` on the first crossing of the kick target plane.
"""

from __future__ import annotations

import hashlib
import io
import json
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, TextIO, Union

import numpy as np

from . import kernel
from .control import gravity_feedforward, pd_tension
from .dynamics import (
    ConfigCache,
    Frame,
    SimState,
    contact_forces,
    initial_state,
    step,
)
from .kinematics import euler_zyx
from .model import (
    WIRE_ID_MAX,
    WIRE_ID_MIN,
    Scenario,
    serialize_scenario,
)
from .planner import DualPlanner, compile_plan

N_SLOTS = WIRE_ID_MAX - WIRE_ID_MIN + 1

CSV_HEADER = (
    "t,x,y,z,roll,pitch,yaw,"
    + ",".join(f"l{i}" for i in range(N_SLOTS)) + ","
    + ",".join(f"fref{i}" for i in range(N_SLOTS)) + ","
    + ",".join(f"iref{i}" for i in range(N_SLOTS)) + ","
    + "phase,events"
)


@dataclass
class TrajectoryLog:
    """Full-rate simulation record, one entry per tick."""

    t: np.ndarray                      # (n,)
    position: np.ndarray               # (n, 3) base origin
    rpy: np.ndarray                    # (n, 3) intrinsic Z-Y-X angles
    lengths: np.ndarray                # (n, 8) measured, zeros for absent wires
    f_ref: np.ndarray                  # (n, 8) commanded tensions
    i_ref: np.ndarray                  # (n, 8) commanded currents
    phase: list[str] = field(default_factory=list)
    events: list[str] = field(default_factory=list)   # ';'-joined per tick

    def __len__(self) -> int:
        return len(self.t)

    def phase_span(self, name: str) -> tuple[int, int]:
        """First and one-past-last tick index logged with the given phase."""
        idx = [i for i, p in enumerate(self.phase) if p == name]
        if not idx:
            raise KeyError(f"no ticks logged in phase {name!r}")
        return idx[0], idx[-1] + 1

    def events_at(self, i: int) -> list[str]:
        return self.events[i].split(";") if self.events[i] else []

    def all_events(self) -> list[tuple[int, str]]:
        out = []
        for i, cell in enumerate(self.events):
            if cell:
                out.extend((i, ev) for ev in cell.split(";"))
        return out


@dataclass
class RunResult:
    scenario: Scenario
    log: TrajectoryLog
    manifest: dict

    @property
    def final_state(self) -> "SimState":
        return self._final_state

    def _set_final(self, state: SimState) -> None:
        self._final_state = state


def scenario_hash(scenario: Scenario) -> str:
    return hashlib.sha256(serialize_scenario(scenario).encode()).hexdigest()


def _slot_array(values: Mapping[int, float]) -> np.ndarray:
    out = np.zeros(N_SLOTS)
    for wid, v in values.items():
        out[wid - WIRE_ID_MIN] = v
    return out


def run(scenario: Scenario) -> RunResult:
    """Simulate the scenario end to end and return the full-rate log."""
    t_wall = time.perf_counter()
    dt = scenario.sim.dt
    n_steps = int(round(scenario.sim.duration / dt))

    state, frame = initial_state(scenario)
    plan = compile_plan(scenario.phases, state.wire_lengths, state.joint_angles)
    planner = DualPlanner(plan)

    wire_map = scenario.wire_map()
    f_max = {wid: w.f_max for wid, w in wire_map.items()}
    weight = scenario.constants.total_mass * scenario.constants.gravity

    n = n_steps + 1
    log = TrajectoryLog(
        t=np.empty(n),
        position=np.empty((n, 3)),
        rpy=np.empty((n, 3)),
        lengths=np.zeros((n, N_SLOTS)),
        f_ref=np.zeros((n, N_SLOTS)),
        i_ref=np.zeros((n, N_SLOTS)),
    )

    touched: set[tuple[str, str]] = set()
    kick = scenario.kick_target
    kick_prev: Optional[float] = None
    kick_done = False
    cache = ConfigCache()

    for k in range(n):
        t = k * dt
        tick = planner.tick(t, state.wire_lengths)

        if tick.compensation:
            comp_wires = [wire_map[wid] for wid in tick.compensation]
            ff = gravity_feedforward(
                comp_wires, frame.geometries, frame.props.com, weight)
        else:
            ff = {}

        cmd = pd_tension(tick.l_ref, state.wire_lengths, state.wire_rates,
                         scenario.gains, ff, f_max, scenario.constants)
        f_cmd = dict(cmd.f_ref)
        i_cmd = dict(cmd.i_ref)
        for wid in tick.track:
            f_cmd[wid] = 0.0
            i_cmd[wid] = 0.0

        events: list[str] = []
        for cf in contact_forces(scenario, frame, state.twist):
            key = (cf.segment, cf.point)
            if key not in touched:
                touched.add(key)
                events.append(f"TouchDown:{cf.segment}.{cf.point}")
        if kick is not None and not kick_done:
            seg, point = kick.foot
            p = frame.frames.point(seg, point)
            s = float((p - kick.point) @ kick.normal)
            if kick_prev is not None and (s > 0.0) != (kick_prev > 0.0):
                speed = (s - kick_prev) / dt
                events.append(f"KickContact:{seg}.{point}:{speed:.6g}")
                kick_done = True
            kick_prev = s

        angles = euler_zyx(state.pose.orientation)
        log.t[k] = t
        log.position[k] = state.pose.position
        log.rpy[k] = (angles.roll, angles.pitch, angles.yaw)
        log.lengths[k] = _slot_array(state.wire_lengths)
        log.f_ref[k] = _slot_array(f_cmd)
        log.i_ref[k] = _slot_array(i_cmd)
        log.phase.append(tick.phase_name)
        log.events.append(";".join(events))

        if k == n_steps:
            break
        state, frame = step(scenario, state, f_cmd,
                            joint_angles_next=planner.theta_at((k + 1) * dt),
                            frame=frame, return_frame=True, cache=cache)

    manifest = {
        "scenario": scenario.meta.name,
        "scenario_hash": scenario_hash(scenario),
        "package_version": _package_version(),
        "kernel_backend": kernel.backend_name,
        "dt": dt,
        "ticks": n,
        "duration": scenario.sim.duration,
        "wall_time_s": round(time.perf_counter() - t_wall, 3),
        "events": sum(1 for _, _ev in _iter_events(log)),
    }
    result = RunResult(scenario=scenario, log=log, manifest=manifest)
    result._set_final(state)
    return result


def _iter_events(log: TrajectoryLog):
    for i, cell in enumerate(log.events):
        if cell:
            for ev in cell.split(";"):
                yield i, ev


def _package_version() -> str:
    from . import __version__
    return __version__


# ---------------------------------------------------------------------------
# CSV


def default_stride(dt: float) -> int:
    """Ticks per emitted row for the 100 Hz default output rate."""
    return max(1, int(round(0.01 / dt)))


def emit_csv(log: TrajectoryLog, out: Union[str, TextIO],
             full_rate: bool = False) -> None:
    """Write the log; ``out`` is a path or an open text file."""
    if isinstance(out, str):
        with open(out, "w", newline="") as fh:
            emit_csv(log, fh, full_rate=full_rate)
        return

    stride = 1 if full_rate else default_stride(
        float(log.t[1] - log.t[0]) if len(log) > 1 else 0.01)
    n = len(log)
    rows = list(range(0, n, stride))
    if rows and rows[-1] != n - 1:
        rows.append(n - 1)

    out.write(CSV_HEADER + "\n")
    pending: list[str] = []
    prev = -1
    for k in rows:
        for j in range(prev + 1, k + 1):
            if log.events[j]:
                pending.append(log.events[j])
        prev = k
        cells = [repr(float(log.t[k]))]
        cells += [repr(float(v)) for v in log.position[k]]
        cells += [repr(float(v)) for v in log.rpy[k]]
        cells += [repr(float(v)) for v in log.lengths[k]]
        cells += [repr(float(v)) for v in log.f_ref[k]]
        cells += [repr(float(v)) for v in log.i_ref[k]]
        cells.append(log.phase[k])
        cells.append(";".join(pending))
        pending = []
        out.write(",".join(cells) + "\n")


def parse_csv(src: Union[str, TextIO]) -> TrajectoryLog:
    """Read a file produced by emit_csv back into a TrajectoryLog."""
    if isinstance(src, str):
        with open(src, "r", newline="") as fh:
            return parse_csv(fh)

    header = src.readline().rstrip("\n")
    if header != CSV_HEADER:
        raise ValueError("unrecognized trajectory CSV header")
    t, pos, rpy, lengths, f_ref, i_ref = [], [], [], [], [], []
    phase: list[str] = []
    events: list[str] = []
    for line in src:
        line = line.rstrip("\n")
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != 7 + 3 * N_SLOTS + 2:
            raise ValueError(f"malformed row: {line[:80]!r}")
        vals = [float(c) for c in cells[:7 + 3 * N_SLOTS]]
        t.append(vals[0])
        pos.append(vals[1:4])
        rpy.append(vals[4:7])
        lengths.append(vals[7:7 + N_SLOTS])
        f_ref.append(vals[7 + N_SLOTS:7 + 2 * N_SLOTS])
        i_ref.append(vals[7 + 2 * N_SLOTS:7 + 3 * N_SLOTS])
        phase.append(cells[-2])
        events.append(cells[-1])
    return TrajectoryLog(
        t=np.asarray(t),
        position=np.asarray(pos).reshape(-1, 3),
        rpy=np.asarray(rpy).reshape(-1, 3),
        lengths=np.asarray(lengths).reshape(-1, N_SLOTS),
        f_ref=np.asarray(f_ref).reshape(-1, N_SLOTS),
        i_ref=np.asarray(i_ref).reshape(-1, N_SLOTS),
        phase=phase,
        events=events,
    )


def csv_text(log: TrajectoryLog, full_rate: bool = False) -> str:
    buf = io.StringIO()
    emit_csv(log, buf, full_rate=full_rate)
    return buf.getvalue()


def write_manifest(manifest: Mapping, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(dict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# plots


def emit_plots(log: TrajectoryLog, outdir: str, stem: str = "trajectory") -> list[str]:
    """Write base-pose, wire-length, and tension SVG plots; returns paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # Rerunning the same scenario must reproduce the plot files byte for
    # byte, so pin the id salt and strip the creation timestamp.
    plt.rcParams["svg.hashsalt"] = stem
    _svg_meta = {"Date": None}

    present = [i for i in range(N_SLOTS)
               if np.any(log.lengths[:, i] != 0.0) or np.any(log.f_ref[:, i] != 0.0)]
    out = []

    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    for j, label in enumerate("xyz"):
        ax0.plot(log.t, log.position[:, j], label=label)
    ax0.set_ylabel("base position [m]")
    ax0.legend(loc="best")
    for j, label in enumerate(("roll", "pitch", "yaw")):
        ax1.plot(log.t, log.rpy[:, j], label=label)
    ax1.set_ylabel("orientation [rad]")
    ax1.set_xlabel("t [s]")
    ax1.legend(loc="best")
    _shade_phases(ax0, log)
    _shade_phases(ax1, log)
    path = f"{outdir}/{stem}_pose.svg"
    fig.savefig(path, metadata=_svg_meta)
    plt.close(fig)
    out.append(path)

    fig, ax = plt.subplots(figsize=(8, 4))
    for i in present:
        ax.plot(log.t, log.lengths[:, i], label=f"l{i}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("wire length [m]")
    ax.legend(loc="best", ncol=2)
    _shade_phases(ax, log)
    path = f"{outdir}/{stem}_lengths.svg"
    fig.savefig(path, metadata=_svg_meta)
    plt.close(fig)
    out.append(path)

    fig, ax = plt.subplots(figsize=(8, 4))
    for i in present:
        ax.plot(log.t, log.f_ref[:, i], label=f"fref{i}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("commanded tension [N]")
    ax.legend(loc="best", ncol=2)
    _shade_phases(ax, log)
    path = f"{outdir}/{stem}_tensions.svg"
    fig.savefig(path, metadata=_svg_meta)
    plt.close(fig)
    out.append(path)
    return out


def _shade_phases(ax, log: TrajectoryLog) -> None:
    starts = [0]
    for i in range(1, len(log.phase)):
        if log.phase[i] != log.phase[i - 1]:
            starts.append(i)
    for n, i in enumerate(starts):
        if n % 2 == 1:
            j = starts[n + 1] if n + 1 < len(starts) else len(log.phase) - 1
            ax.axvspan(log.t[i], log.t[j], alpha=0.08, color="gray")

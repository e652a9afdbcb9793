"""Built-in demonstration scenarios.

Three scripted motions ship with the package: a pull-up on four
overhead wires, rising from a prone pose to standing, and a mid-air
kick.  The body model is a six-segment humanoid carrying a winch cube
on its pelvis; wire exits sit on the cube faces.

Anchor coordinates, segment dimensions, wind amounts, and phase timings
are invented values tuned for stable desk-scale motion; none of them
are measurements.  Amounts are computed from the start-pose geometry by
forward kinematics so the scripts stay consistent if the body model
changes.  Each scenario's notes record the same caveat.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .kinematics import (
    composite_properties,
    forward_kinematics,
    quat_from_euler_zyx,
    rotation_about_axis,
    wire_geometries,
)
from .model import Pose, Scenario, scenario_from_dict

__all__ = ["builtin_scenario", "builtin_scenario_names"]

_CUBE_HALF = 0.125

# Wire exits on the cube, in the base frame (x forward, y left, z up).
# 2,5,6,7 share the top face (pull-up quad); 2,5 sit on the rear-top
# edge and 3,4 on the bottom face so the prone hang in the rising
# scenario straddles the composite COM; 0,1 are the internal wires
# routed to the shoulders.
_EXITS = {
    0: (-0.125, 0.07, 0.125),
    1: (-0.125, -0.07, 0.125),
    2: (-0.125, 0.125, 0.125),
    3: (0.0, -0.125, -0.125),
    4: (0.0, 0.125, -0.125),
    5: (-0.125, -0.125, 0.125),
    6: (0.125, -0.125, 0.125),
    7: (0.125, 0.125, 0.125),
}


def _segments() -> list[dict]:
    def diag(a: float, b: float, c: float) -> list[list[float]]:
        return [[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]]

    exits = {f"exit{i}": list(p) for i, p in _EXITS.items()}
    return [
        {
            "name": "core",
            "mass": 16.6,
            "com": [0.01, 0.0, -0.02],
            "inertia": diag(0.17, 0.17, 0.17),
            "attachment_points": exits,
        },
        {
            "name": "torso",
            "mass": 15.0,
            "com": [0.0, 0.0, 0.22],
            "inertia": diag(0.50, 0.40, 0.18),
            "attachment_points": {
                "l_shoulder": [0.0, 0.20, 0.38],
                "r_shoulder": [0.0, -0.20, 0.38],
            },
            "contact_points": {"chest": [0.09, 0.0, 0.28]},
        },
        {
            "name": "l_thigh",
            "mass": 3.5,
            "com": [0.0, 0.0, -0.18],
            "inertia": diag(0.055, 0.055, 0.008),
            "contact_points": {"knee_pad": [0.09, 0.0, -0.36]},
        },
        {
            "name": "r_thigh",
            "mass": 3.5,
            "com": [0.0, 0.0, -0.18],
            "inertia": diag(0.055, 0.055, 0.008),
            "contact_points": {"knee_pad": [0.09, 0.0, -0.36]},
        },
        {
            "name": "l_shank",
            "mass": 3.0,
            "com": [0.0, 0.0, -0.18],
            "inertia": diag(0.052, 0.052, 0.005),
            "contact_points": {
                "toe": [0.10, 0.0, -0.42],
                "heel": [-0.05, 0.0, -0.42],
            },
        },
        {
            "name": "r_shank",
            "mass": 3.0,
            "com": [0.0, 0.0, -0.18],
            "inertia": diag(0.052, 0.052, 0.005),
            "contact_points": {
                "toe": [0.10, 0.0, -0.42],
                "heel": [-0.05, 0.0, -0.42],
            },
        },
    ]


def _joints() -> list[dict]:
    return [
        {
            "name": "waist_pitch",
            "parent": "core",
            "child": "torso",
            "origin": [0.03, 0.0, 0.05],
            "axis": [0.0, 1.0, 0.0],
            "limits": [-1.0, 1.0],
            "torque_limit": 150.0,
        },
        {
            "name": "l_hip_pitch",
            "parent": "core",
            "child": "l_thigh",
            "origin": [0.03, 0.09, -0.10],
            "axis": [0.0, 1.0, 0.0],
            "limits": [-2.2, 0.6],
        },
        {
            "name": "r_hip_pitch",
            "parent": "core",
            "child": "r_thigh",
            "origin": [0.03, -0.09, -0.10],
            "axis": [0.0, 1.0, 0.0],
            "limits": [-2.2, 0.6],
        },
        {
            "name": "l_knee_pitch",
            "parent": "l_thigh",
            "child": "l_shank",
            "origin": [0.0, 0.0, -0.38],
            "axis": [0.0, 1.0, 0.0],
            "limits": [-0.05, 2.4],
        },
        {
            "name": "r_knee_pitch",
            "parent": "r_thigh",
            "child": "r_shank",
            "origin": [0.0, 0.0, -0.38],
            "axis": [0.0, 1.0, 0.0],
            "limits": [-0.05, 2.4],
        },
    ]


def _env_wire(wid: int, anchor: Sequence[float],
              via: Sequence[Sequence[str]] = ()) -> dict:
    node: dict = {
        "id": wid,
        "exit": ["core", f"exit{wid}"],
        "anchor": {"world": [float(v) for v in anchor]},
    }
    if via:
        node["via"] = [list(v) for v in via]
    return node


def _body_wire(wid: int, point: Sequence[str]) -> dict:
    return {
        "id": wid,
        "exit": ["core", f"exit{wid}"],
        "anchor": {"body": list(point)},
    }


def _probe(doc: Mapping, name: str) -> Scenario:
    """Load a geometry-only copy of a scenario document for FK queries."""
    d = dict(doc)
    d["meta"] = {"name": name}
    d["phases"] = [{"name": "probe", "duration": 1.0}]
    return scenario_from_dict(d)


def _frames(scn: Scenario, position: Sequence[float], rpy: Sequence[float],
            joints: Mapping[str, float]):
    pose = Pose(position=np.asarray(position, dtype=float),
                orientation=quat_from_euler_zyx(*rpy))
    return forward_kinematics(scn, pose, joints)


def _lengths(scn: Scenario, frames) -> dict[int, float]:
    return {wid: g.length for wid, g in wire_geometries(scn, frames).items()}


def _round(x: float) -> float:
    # keep generated scenario files readable without losing behavior
    return round(float(x), 9)


# ---------------------------------------------------------------------------
# pull-up


def _build_pull_up() -> Scenario:
    base_z = 1.10
    lift = 0.53
    duration = 40.0
    wire_ids = (2, 5, 6, 7)

    doc: dict = {
        "meta": {"name": "pull_up"},
        "segments": _segments(),
        "joints": _joints(),
        "wires": [_env_wire(w, (0.0, 0.0, 3.0)) for w in wire_ids],
        "sim": {
            "dt": 0.001,
            "base_position": [0.0, 0.0, base_z],
            "base_rpy": [0.0, 0.0, 0.0],
            "joint_angles": {},
        },
        "contact": {"enabled": False},
    }

    # Hang the body at its pendulum equilibrium: pitch the base so the
    # composite COM sits directly below the centroid of the four top
    # exits, then drop each anchor vertically above its exit.  With
    # identical vertical wire directions the feedforward split is exact
    # weight/4 and the start pose is moment-free.
    probe = _probe(doc, "pull_up_probe")
    frames0 = _frames(probe, (0.0, 0.0, base_z), (0.0, 0.0, 0.0), {})
    com_local = composite_properties(probe, frames0).com - np.array(
        [0.0, 0.0, base_z])
    centroid = np.mean([np.asarray(_EXITS[w]) for w in wire_ids], axis=0)
    v = com_local - centroid
    pitch = math.atan2(v[0], -v[2])

    frames1 = _frames(probe, (0.0, 0.0, base_z), (0.0, pitch, 0.0), {})
    wires = []
    for wid in wire_ids:
        exit_w = frames1.point("core", f"exit{wid}")
        wires.append(_env_wire(wid, (_round(exit_w[0]), _round(exit_w[1]), 3.0)))

    doc["meta"] = {
        "name": "pull_up",
        "notes": [
            "Suspended hang on the four top-face wires; one phase winds "
            "each wire by the full lift distance.",
            "Anchors sit 3.0 m up, directly above the start-pose exits, "
            "so all four wires stay vertical and share the weight "
            "equally.",
            "The start pitch leans the hang to its pendulum equilibrium "
            "(COM under the exit centroid); all geometry here is an "
            "invented desk-scale arrangement.",
        ],
    }
    doc["wires"] = wires
    doc["sim"]["base_rpy"] = [0.0, _round(pitch), 0.0]
    doc["phases"] = [
        {
            "name": "Ascend",
            "duration": duration,
            "wire_targets": {str(w): -lift for w in wire_ids},
            "compensation": list(wire_ids),
        }
    ]
    return scenario_from_dict(doc)


# ---------------------------------------------------------------------------
# rising from prone


def _build_rising() -> Scenario:
    prone_rpy = (0.0, 1.55, 0.0)
    folded = {"l_hip_pitch": -0.5, "r_hip_pitch": -0.5,
              "l_knee_pitch": 2.2, "r_knee_pitch": 2.2}
    extended = {"l_hip_pitch": -0.05, "r_hip_pitch": -0.05,
                "l_knee_pitch": 0.25, "r_knee_pitch": 0.25}
    standing = {"l_hip_pitch": 0.0, "r_hip_pitch": 0.0,
                "l_knee_pitch": 0.05, "r_knee_pitch": 0.05}
    lift_height = 0.405
    hang_z = 1.20
    hang_x = -0.125
    land_slack = 0.30
    pretension_wind = -0.08

    shoulder_via = {6: [["torso", "r_shoulder"]], 7: [["torso", "l_shoulder"]]}

    def wires(anchors: Mapping[int, Sequence[float]]) -> list[dict]:
        out = [
            _body_wire(0, ["torso", "l_shoulder"]),
            _body_wire(1, ["torso", "r_shoulder"]),
        ]
        for wid in (2, 3, 4, 5, 6, 7):
            out.append(_env_wire(wid, anchors[wid],
                                 via=shoulder_via.get(wid, ())))
        return out

    rough = {w: (0.0, 0.0, 2.6) for w in (2, 3, 4, 5, 6, 7)}
    doc: dict = {
        "meta": {"name": "rising"},
        "segments": _segments(),
        "joints": _joints(),
        "wires": wires(rough),
        "sim": {
            "dt": 0.001,
            "base_position": [0.0, 0.0, 0.30],
            "base_rpy": list(prone_rpy),
            "joint_angles": dict(folded),
        },
        "contact": {"enabled": True},
    }
    probe = _probe(doc, "rising_probe")

    # start height: lowest contact point 10 mm above the floor
    f0 = _frames(probe, (0.0, 0.0, 0.0), prone_rpy, folded)
    low = min(
        f0.point(seg.name, pname)[2]
        for seg in probe.segments for pname in seg.contact_points)
    start_z = _round(0.010 - low)

    # anchors: 2,5 above the prone head-side exits; 3,4 above both their
    # prone and standing positions (exit x is the same in both poses by
    # construction); 6,7 above the standing shoulders
    f_init = _frames(probe, (0.0, 0.0, start_z), prone_rpy, folded)
    f_up = _frames(probe, (hang_x, 0.0, hang_z), (0.0, 0.0, 0.0), extended)
    ex2 = f_init.point("core", "exit2")
    ex3 = f_init.point("core", "exit3")
    shoulder = f_up.point("torso", "l_shoulder")
    anchors = {
        2: (_round(ex2[0]), 0.50, 2.6),
        5: (_round(ex2[0]), -0.50, 2.6),
        3: (_round(ex3[0]), -0.40, 2.6),
        4: (_round(ex3[0]), 0.40, 2.6),
        6: (_round(shoulder[0]), -0.45, 2.7),
        7: (_round(shoulder[0]), 0.45, 2.7),
    }
    doc["wires"] = wires(anchors)
    doc["sim"]["base_position"] = [0.0, 0.0, start_z]
    probe = _probe(doc, "rising_probe")

    # waypoint wire lengths
    l_init = _lengths(probe, _frames(probe, (0.0, 0.0, start_z), prone_rpy,
                                     folded))
    l_lift = _lengths(probe, _frames(probe, (0.0, 0.0, start_z + lift_height),
                                     prone_rpy, folded))
    l_up = _lengths(probe, _frames(probe, (hang_x, 0.0, hang_z),
                                   (0.0, 0.0, 0.0), extended))

    # landing height: toes just below the floor at the standing pose
    f_stand = _frames(probe, (hang_x, 0.0, hang_z), (0.0, 0.0, 0.0), standing)
    toe = f_stand.point("l_shank", "toe")
    land_z = _round(hang_z - toe[2] - 0.005)
    l_land = _lengths(probe, _frames(probe, (hang_x, 0.0, land_z),
                                     (0.0, 0.0, 0.0), standing))

    def delta(table_b: Mapping[int, float], table_a: Mapping[int, float],
              wid: int, extra: float = 0.0) -> float:
        return _round(table_b[wid] - table_a[wid] + extra)

    doc["meta"] = {
        "name": "rising",
        "notes": [
            "Prone start with legs pre-folded; wires 2-5 lift the body, "
            "6,7 run over the shoulders and later swing it upright, 0,1 "
            "are internal cube-to-shoulder wires pretensioned to relieve "
            "the waist.",
            "Landing pays out the computed descent plus a fixed slack "
            "margin so the wires go limp once the feet carry the weight; "
            "no force sensing is modeled.",
            "Anchors and wind amounts are invented desk-scale values "
            "computed from the start-pose geometry by forward "
            "kinematics.",
        ],
    }

    doc["phases"] = [
        {
            "name": "Lifting",
            "duration": 30.0,
            "wire_targets": {
                "2": delta(l_lift, l_init, 2),
                "3": delta(l_lift, l_init, 3),
                "4": delta(l_lift, l_init, 4),
                "5": delta(l_lift, l_init, 5),
                "6": "track",
                "7": "track",
                "0": pretension_wind,
                "1": pretension_wind,
            },
            "compensation": [2, 3, 4, 5],
        },
        {
            "name": "Rotation",
            "duration": 20.0,
            "wire_targets": {
                "2": delta(l_up, l_lift, 2),
                "3": delta(l_up, l_lift, 3),
                "4": delta(l_up, l_lift, 4),
                "5": delta(l_up, l_lift, 5),
                "6": delta(l_up, l_lift, 6),
                "7": delta(l_up, l_lift, 7),
            },
            "compensation": [2, 3, 4, 5, 6, 7],
            "joint_targets": dict(extended),
            "sync_barrier": True,
        },
        {
            "name": "Landing",
            "duration": 15.0,
            "wire_targets": {
                "2": "track",
                "5": "track",
                "3": delta(l_land, l_up, 3, land_slack),
                "4": delta(l_land, l_up, 4, land_slack),
                "6": delta(l_land, l_up, 6, land_slack),
                "7": delta(l_land, l_up, 7, land_slack),
            },
            "compensation": [3, 4, 6, 7],
            "joint_targets": dict(standing),
            "sync_barrier": True,
        },
    ]
    return scenario_from_dict(doc)


# ---------------------------------------------------------------------------
# mid-air kick


def _build_kick() -> Scenario:
    base = (0.0, 0.0, 1.20)
    kick_joints = {"r_hip_pitch": -0.9, "r_knee_pitch": 0.5}
    wind_right = -0.06
    unwind_left = 0.06
    swing_wind = -0.18
    sweep = 0.20  # rad of yaw between the kicking pose and the target plane

    # The quad hangs from the top-face exits with anchors nearly overhead:
    # differential winding then rolls the body without coupling into yaw,
    # and the weak yaw stiffness lets the swing wire turn the body freely.
    anchors = {
        2: (-0.15, 0.45, 2.8),
        5: (-0.15, -0.45, 2.8),
        6: (0.15, -0.45, 2.8),
        7: (0.15, 0.45, 2.8),
        1: (3.0, 0.2, 1.5),
    }
    doc: dict = {
        "meta": {"name": "kick"},
        "segments": _segments(),
        "joints": _joints(),
        "wires": [_env_wire(w, anchors[w]) for w in (1, 2, 5, 6, 7)],
        "sim": {
            "dt": 0.001,
            "base_position": list(base),
            "base_rpy": [0.0, 0.0, 0.0],
            "joint_angles": {},
        },
        # the nearly parallel suspension leaves the pendulum modes lightly
        # damped, so the winch rate gain runs higher than the default
        "gains": {"kp": 500.0, "kd": 150.0},
        "contact": {"enabled": False},
    }
    probe = _probe(doc, "kick_probe")

    # Estimate the tilted kicking pose to place the target plane: the
    # differential wind rolls the body right-side-up by roughly the
    # length split over the lateral exit spread.  The plane is hung on
    # the foot's yaw arc, normal along the direction of travel, so the
    # exact tilt angle is not critical.
    roll_est = -math.asin(min(1.0, (abs(wind_right) + abs(unwind_left))
                              / (2.0 * _CUBE_HALF * 2.0)))
    f_kick = _frames(probe, base, (roll_est, 0.0, 0.0), kick_joints)
    com = composite_properties(probe, f_kick).com
    foot = f_kick.point("r_shank", "toe")
    radial = np.array([foot[0] - com[0], foot[1] - com[1], 0.0])
    rz = rotation_about_axis(np.array([0.0, 0.0, 1.0]), sweep)
    point = np.array([com[0], com[1], foot[2]]) + rz @ radial
    tangent = np.cross(np.array([0.0, 0.0, 1.0]), rz @ radial)
    normal = tangent / np.linalg.norm(tangent)

    doc["meta"] = {
        "name": "kick",
        "notes": [
            "Suspended on wires 2,5,6,7; the first phase winds the right "
            "pair and pays out the left pair to roll the body while the "
            "right leg raises into a kicking pose.",
            "The second phase winds wire 1, anchored forward at roughly "
            "exit height, yawing the body so the raised foot sweeps "
            "through the target plane.",
            "The target plane is placed on the foot's predicted yaw arc "
            "ahead of the kicking pose; anchors and wind amounts are "
            "invented desk-scale values.",
        ],
    }
    doc["kick_target"] = {
        "point": [_round(point[0]), _round(point[1]), _round(point[2])],
        "normal": [_round(normal[0]), _round(normal[1]), _round(normal[2])],
        "foot": ["r_shank", "toe"],
    }
    doc["phases"] = [
        {
            "name": "Tilt",
            "duration": 20.0,
            "wire_targets": {
                "5": wind_right,
                "6": wind_right,
                "2": unwind_left,
                "7": unwind_left,
                "1": "track",
            },
            "compensation": [2, 5, 6, 7],
            "joint_targets": dict(kick_joints),
        },
        {
            "name": "Swing",
            "duration": 2.0,
            "wire_targets": {"1": swing_wind},
            "compensation": [2, 5, 6, 7],
            "sync_barrier": True,
        },
        {
            "name": "FollowThrough",
            "duration": 4.0,
            "wire_targets": {},
            "compensation": [2, 5, 6, 7],
        },
    ]
    return scenario_from_dict(doc)


_BUILDERS = {
    "pull_up": _build_pull_up,
    "rising": _build_rising,
    "kick": _build_kick,
}


def builtin_scenario_names() -> tuple[str, ...]:
    return tuple(sorted(_BUILDERS))


def builtin_scenario(name: str) -> Scenario:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        known = ", ".join(builtin_scenario_names())
        raise KeyError(f"unknown builtin scenario {name!r}; known: {known}")
    return builder()

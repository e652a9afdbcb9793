"""Rigid-body kinematics: quaternions, frames, cable routing, wrench columns.

Conventions used throughout:

* quaternions are (w, x, y, z), unit norm, world-from-body;
* Euler angles are intrinsic Z-Y-X (yaw, then pitch, then roll), i.e.
  ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``, pitch in [-pi/2, pi/2];
* a wire leaves the winch at its exit point, passes zero-radius
  frictionless via points, and ends at an anchor.  Unit tension applies,
  at every routed body point, the sum of unit vectors pointing away from
  that point along the adjacent straight segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .model import BodySegment, Pose, Scenario, Wire

GIMBAL_PITCH_MARGIN = 1e-6


# ---------------------------------------------------------------------------
# quaternions


def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    norm = math.sqrt(float(q @ q))
    if norm < 1e-12:
        raise ValueError("cannot normalize a zero quaternion")
    return q / norm


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    return np.array([
        [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
        [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
        [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
    ])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    return quat_to_matrix(q) @ np.asarray(v, dtype=float)


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    norm = float(np.linalg.norm(axis))
    if norm < 1e-12:
        raise ValueError("rotation axis must be nonzero")
    half = 0.5 * angle
    return np.array([math.cos(half), *(math.sin(half) / norm * axis)])


def quat_from_rotvec(v: np.ndarray) -> np.ndarray:
    """Exponential map: rotation vector (axis * angle) to quaternion."""
    v = np.asarray(v, dtype=float)
    angle = math.sqrt(float(v @ v))
    half = 0.5 * angle
    if angle < 1e-8:
        # sin(half)/angle to second order keeps the map smooth at zero
        scale = 0.5 - angle * angle / 48.0
    else:
        scale = math.sin(half) / angle
    return np.array([math.cos(half), *(scale * v)])


def quat_from_euler_zyx(roll: float, pitch: float, yaw: float) -> np.ndarray:
    qz = quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), yaw)
    qy = quat_from_axis_angle(np.array([0.0, 1.0, 0.0]), pitch)
    qx = quat_from_axis_angle(np.array([1.0, 0.0, 0.0]), roll)
    return quat_multiply(quat_multiply(qz, qy), qx)


@dataclass(frozen=True)
class EulerAngles:
    roll: float
    pitch: float
    yaw: float
    gimbal_proximity: bool = False


def euler_zyx(q: np.ndarray) -> EulerAngles:
    """Quaternion to intrinsic Z-Y-X angles.

    Near pitch = +/- pi/2 the roll/yaw split degenerates; the returned
    angles are still a valid decomposition (roll pinned to 0 exactly at
    the pole) and gimbal_proximity is set.
    """
    r = quat_to_matrix(quat_normalize(q))
    sy = -r[2, 0]
    sy_clamped = min(1.0, max(-1.0, sy))
    pitch = math.asin(sy_clamped)
    if abs(sy_clamped) >= 1.0 - 1e-12:
        roll = 0.0
        yaw = math.atan2(-r[0, 1], r[1, 1])
    else:
        roll = math.atan2(r[2, 1], r[2, 2])
        yaw = math.atan2(r[1, 0], r[0, 0])
    flagged = abs(pitch) > math.pi / 2.0 - GIMBAL_PITCH_MARGIN
    return EulerAngles(roll, pitch, yaw, flagged)


def euler_zyx_array(quats: np.ndarray) -> np.ndarray:
    """Batch Z-Y-X extraction for logging; rows are (roll, pitch, yaw)."""
    quats = np.asarray(quats, dtype=float)
    out = np.empty((quats.shape[0], 3))
    for i in range(quats.shape[0]):
        e = euler_zyx(quats[i])
        out[i, 0], out[i, 1], out[i, 2] = e.roll, e.pitch, e.yaw
    return out


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis."""
    x, y, z = axis
    c, s = math.cos(angle), math.sin(angle)
    t = 1.0 - c
    return np.array([
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [x * y * t + z * s, c + y * y * t, y * z * t - x * s],
        [x * z * t - y * s, y * z * t + x * s, c + z * z * t],
    ])


# ---------------------------------------------------------------------------
# forward kinematics


class JointLimitError(ValueError):
    pass


@dataclass
class BodyFrames:
    """World rotation and origin per segment, with named point lookup."""

    rotations: Mapping[str, np.ndarray]
    origins: Mapping[str, np.ndarray]
    segments: Mapping[str, BodySegment]

    def point(self, segment: str, name: str) -> np.ndarray:
        local = self.segments[segment].point_local(name)
        return self.origins[segment] + self.rotations[segment] @ local

    def segment_com(self, segment: str) -> np.ndarray:
        seg = self.segments[segment]
        return self.origins[segment] + self.rotations[segment] @ seg.com


def translate_frames(frames: BodyFrames, delta: np.ndarray) -> BodyFrames:
    """The same configuration rigidly shifted by ``delta`` (shared rotations)."""
    return BodyFrames(
        rotations=frames.rotations,
        origins={name: origin + delta for name, origin in frames.origins.items()},
        segments=frames.segments,
    )


def oriented_frames(frames: BodyFrames, rotation: np.ndarray,
                    translation: np.ndarray) -> BodyFrames:
    """A body-frame configuration mapped through the world pose (R, p)."""
    rotations = {}
    origins = {}
    body_origins = frames.origins
    for name, r in frames.rotations.items():
        rotations[name] = rotation @ r
        origins[name] = translation + rotation @ body_origins[name]
    return BodyFrames(rotations=rotations, origins=origins,
                      segments=frames.segments)


def forward_kinematics(scenario: Scenario, base_pose: Pose,
                       joint_angles: Mapping[str, float],
                       check_limits: bool = True) -> BodyFrames:
    """Propagate the base pose through the revolute joint tree."""

    segments = scenario.segment_map()
    root = scenario.root_segment()
    rotations: dict[str, np.ndarray] = {
        root: quat_to_matrix(quat_normalize(base_pose.orientation))}
    origins: dict[str, np.ndarray] = {
        root: np.asarray(base_pose.position, dtype=float)}

    remaining = list(scenario.joints)
    while remaining:
        progressed = False
        for joint in list(remaining):
            if joint.parent not in rotations:
                continue
            angle = float(joint_angles.get(joint.name, 0.0))
            lo, hi = joint.limits
            if check_limits and not (lo - 1e-9 <= angle <= hi + 1e-9):
                raise JointLimitError(
                    f"joint {joint.name!r} angle {angle:.6g} outside "
                    f"limits [{lo:.6g}, {hi:.6g}]")
            parent_r = rotations[joint.parent]
            rotations[joint.child] = parent_r @ rotation_about_axis(joint.axis, angle)
            origins[joint.child] = origins[joint.parent] + parent_r @ joint.origin
            remaining.remove(joint)
            progressed = True
        if not progressed:
            names = [j.name for j in remaining]
            raise ValueError(f"joint tree is not connected to the root: {names!r}")
    return BodyFrames(rotations=rotations, origins=origins, segments=segments)


@dataclass(frozen=True)
class CompositeProperties:
    mass: float
    com: np.ndarray
    inertia: np.ndarray  # about the composite COM, world axes


def composite_properties(scenario: Scenario, frames: BodyFrames) -> CompositeProperties:
    """Mass, COM and inertia of the whole body at the current configuration."""

    origins = frames.origins
    rotations = frames.rotations
    mass = 0.0
    weighted = np.zeros(3)
    seg_coms = {}
    for seg in scenario.segments:
        seg_com = origins[seg.name] + rotations[seg.name] @ seg.com
        seg_coms[seg.name] = seg_com
        mass += seg.mass
        weighted += seg.mass * seg_com
    com = weighted / mass

    inertia = np.zeros((3, 3))
    eye = np.eye(3)
    for seg in scenario.segments:
        r = rotations[seg.name]
        d = seg_coms[seg.name] - com
        inertia += r @ np.asarray(seg.inertia, dtype=float) @ r.T
        inertia += seg.mass * (float(d @ d) * eye - d[:, None] * d)
    return CompositeProperties(mass=mass, com=com, inertia=inertia)


# ---------------------------------------------------------------------------
# wire geometry


@dataclass(frozen=True)
class ForceApplication:
    segment: str          # body segment receiving the force
    point: np.ndarray     # world position
    direction: np.ndarray  # force per unit tension (not necessarily unit norm)


@dataclass(frozen=True)
class WireGeometry:
    wire_id: int
    is_environment: bool
    route: np.ndarray                     # (m, 3) world points, exit first
    length: float
    force_application: tuple[ForceApplication, ...]
    # sum of per-point force directions; zero for body-anchored wires
    net_force_direction: np.ndarray


def wire_geometry(scenario: Scenario, wire: Wire, frames: BodyFrames) -> WireGeometry:
    """Polyline length and per-point force directions for one wire."""

    if not wire.via_points and wire.anchor.is_environment:
        # straight run from exit to a fixed anchor: the common case
        exit_seg = wire.exit_point[0]
        p0 = frames.point(*wire.exit_point)
        p1 = wire.anchor.world
        delta = p1 - p0
        norm = math.sqrt(float(delta @ delta))
        if norm < 1e-12:
            raise ValueError(
                f"wire {wire.id}: consecutive routing points 0 and 1 coincide")
        unit = delta / norm
        return WireGeometry(
            wire_id=wire.id,
            is_environment=True,
            route=np.array([p0, p1]),
            length=norm,
            force_application=(ForceApplication(exit_seg, p0, unit),),
            net_force_direction=unit,
        )

    route_points = [frames.point(*wire.exit_point)]
    route_segments: list[Optional[str]] = [wire.exit_point[0]]
    for via in wire.via_points:
        route_points.append(frames.point(*via))
        route_segments.append(via[0])
    if wire.anchor.is_environment:
        route_points.append(np.asarray(wire.anchor.world, dtype=float))
        route_segments.append(None)
    else:
        seg, point = wire.anchor.body
        route_points.append(frames.point(seg, point))
        route_segments.append(seg)

    route = np.vstack(route_points)
    m = route.shape[0]
    units = np.empty((m - 1, 3))
    length = 0.0
    for i in range(m - 1):
        delta = route[i + 1] - route[i]
        norm = math.sqrt(float(delta @ delta))
        if norm < 1e-12:
            raise ValueError(
                f"wire {wire.id}: consecutive routing points {i} and {i + 1} coincide")
        units[i] = delta / norm
        length += norm

    applications = []
    # exit point: pulled toward the first routing point
    applications.append(ForceApplication(route_segments[0], route[0], units[0].copy()))
    # interior via points: away along both adjacent segments
    for i in range(1, m - 1):
        applications.append(ForceApplication(
            route_segments[i], route[i], units[i] - units[i - 1]))
    # a body-anchored far end is pulled back toward the previous point
    if not wire.anchor.is_environment:
        applications.append(ForceApplication(
            route_segments[-1], route[-1], -units[-1]))

    net = np.zeros(3)
    for app in applications:
        net = net + app.direction
    return WireGeometry(
        wire_id=wire.id,
        is_environment=wire.anchor.is_environment,
        route=route,
        length=length,
        force_application=tuple(applications),
        net_force_direction=net,
    )


def wire_geometries(scenario: Scenario, frames: BodyFrames) -> dict[int, WireGeometry]:
    return {w.id: wire_geometry(scenario, w, frames) for w in scenario.wires}


def wrench_matrix(geometries: Sequence[WireGeometry], com: np.ndarray) -> np.ndarray:
    """6 x k matrix of unit-tension wrenches about ``com``.

    Rows 0..2 are force, rows 3..5 the moment about the composite COM.
    Body-anchored wires produce columns that cancel to zero; they are
    accepted so that the cancellation is observable.
    """
    com = np.asarray(com, dtype=float)
    out = np.zeros((6, len(geometries)))
    for k, geom in enumerate(geometries):
        force = np.zeros(3)
        moment = np.zeros(3)
        for app in geom.force_application:
            force += app.direction
            moment += np.cross(app.point - com, app.direction)
        out[:3, k] = force
        out[3:, k] = moment
    return out

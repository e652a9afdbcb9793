"""Floating-base dynamics with quasi-static composite inertia.

The whole body is integrated as a single rigid body whose mass, COM and
inertia are recomputed from the current joint angles every step (joint
rate terms are dropped; joints are kinematically prescribed).  State
convention:

* ``pose.position`` is the base segment origin in the world;
* ``twist.linear`` is the velocity of the composite COM;
* ``twist.angular`` is the world-frame angular velocity.

Integration is semi-implicit: velocities first from the assembled
wrench, then the COM position with the average of old and new velocity
(exact for constant acceleration, so ballistic flight carries no
integrator bias), then the orientation by the quaternion exponential of
the new angular velocity.  Joint motion repositions the base origin so
the COM path is preserved, which keeps momentum bookkeeping honest when
limbs move in flight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .kinematics import (
    BodyFrames,
    CompositeProperties,
    WireGeometry,
    composite_properties,
    forward_kinematics,
    oriented_frames,
    quat_from_euler_zyx,
    quat_from_rotvec,
    quat_multiply,
    quat_normalize,
    quat_to_matrix,
    wire_geometries,
)
from .model import Pose, Scenario, Twist


class NonFiniteStateError(RuntimeError):
    """The integrator produced NaN or infinity; the scenario is diverging."""


def _cross(a, b) -> np.ndarray:
    # np.cross dispatch overhead dominates 3-vector use; keep it scalar
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def _solve33(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cofactor solve of a well-conditioned 3x3 system (inertia tensors)."""
    a00, a01, a02 = float(a[0, 0]), float(a[0, 1]), float(a[0, 2])
    a10, a11, a12 = float(a[1, 0]), float(a[1, 1]), float(a[1, 2])
    a20, a21, a22 = float(a[2, 0]), float(a[2, 1]), float(a[2, 2])
    c00 = a11 * a22 - a12 * a21
    c01 = a12 * a20 - a10 * a22
    c02 = a10 * a21 - a11 * a20
    det = a00 * c00 + a01 * c01 + a02 * c02
    b0, b1, b2 = float(b[0]), float(b[1]), float(b[2])
    return np.array([
        (c00 * b0 + (a02 * a21 - a01 * a22) * b1 + (a01 * a12 - a02 * a11) * b2) / det,
        (c01 * b0 + (a00 * a22 - a02 * a20) * b1 + (a02 * a10 - a00 * a12) * b2) / det,
        (c02 * b0 + (a01 * a20 - a00 * a21) * b1 + (a00 * a11 - a01 * a10) * b2) / det,
    ])


@dataclass
class SimState:
    t: float
    pose: Pose
    twist: Twist
    joint_angles: dict[str, float]
    wire_lengths: dict[int, float]
    wire_rates: dict[int, float]

    def copy(self) -> "SimState":
        return SimState(self.t, self.pose.copy(), self.twist.copy(),
                        dict(self.joint_angles), dict(self.wire_lengths),
                        dict(self.wire_rates))


@dataclass
class Frame:
    """Everything derived from one configuration, computed once per tick."""

    frames: BodyFrames
    props: CompositeProperties
    geometries: dict[int, WireGeometry]


def compute_frame(scenario: Scenario, pose: Pose,
                  joint_angles: Mapping[str, float]) -> Frame:
    frames = forward_kinematics(scenario, pose, joint_angles)
    props = composite_properties(scenario, frames)
    geometries = wire_geometries(scenario, frames)
    return Frame(frames=frames, props=props, geometries=geometries)


def initial_state(scenario: Scenario) -> tuple[SimState, Frame]:
    """State at t = 0: at rest, wire lengths taken from the geometry."""
    roll, pitch, yaw = scenario.sim.base_rpy
    pose = Pose(
        position=np.asarray(scenario.sim.base_position, dtype=float).copy(),
        orientation=quat_from_euler_zyx(float(roll), float(pitch), float(yaw)),
    )
    joint_angles = {j.name: float(scenario.sim.joint_angles.get(j.name, 0.0))
                    for j in scenario.joints}
    frame = compute_frame(scenario, pose, joint_angles)
    lengths = {wid: geom.length for wid, geom in frame.geometries.items()}
    state = SimState(
        t=0.0,
        pose=pose,
        twist=Twist.zero(),
        joint_angles=joint_angles,
        wire_lengths=lengths,
        wire_rates={wid: 0.0 for wid in lengths},
    )
    return state, frame


# ---------------------------------------------------------------------------
# forces


@dataclass(frozen=True)
class ContactForce:
    segment: str
    point: str
    position: np.ndarray
    force: np.ndarray
    penetration: float


def contact_forces(scenario: Scenario, frame: Frame,
                   twist: Twist) -> list[ContactForce]:
    """Penalty ground forces at contact points below z = 0."""
    if not scenario.contact.enabled:
        return []
    k = scenario.contact.stiffness
    d = scenario.contact.damping
    mu = scenario.contact.tangential_damping
    com = frame.props.com
    out = []
    for seg in scenario.segments:
        rot = frame.frames.rotations[seg.name]
        origin = frame.frames.origins[seg.name]
        for name, local in seg.contact_points.items():
            p = origin + rot @ local
            if p[2] >= 0.0:
                continue
            v = twist.linear + _cross(twist.angular, p - com)
            fn = max(0.0, -k * p[2] - d * v[2])
            force = np.array([-mu * v[0], -mu * v[1], fn])
            out.append(ContactForce(seg.name, name, p, force, -float(p[2])))
    return out


def assemble_wrench(scenario: Scenario, state: SimState,
                    tensions: Mapping[int, float],
                    frame: Optional[Frame] = None) -> np.ndarray:
    """Net (force, moment-about-COM) from gravity, wires, and ground contact."""
    if frame is None:
        frame = compute_frame(scenario, state.pose, state.joint_angles)
    props = frame.props
    com = props.com
    cx, cy, cz = float(com[0]), float(com[1]), float(com[2])

    fx = fy = mx = my = mz = 0.0
    fz = -props.mass * scenario.constants.gravity

    for wid, tension in tensions.items():
        if tension == 0.0:
            continue
        geom = frame.geometries[wid]
        for app in geom.force_application:
            d = app.direction
            p = app.point
            ax = tension * float(d[0])
            ay = tension * float(d[1])
            az = tension * float(d[2])
            rx = float(p[0]) - cx
            ry = float(p[1]) - cy
            rz = float(p[2]) - cz
            fx += ax
            fy += ay
            fz += az
            mx += ry * az - rz * ay
            my += rz * ax - rx * az
            mz += rx * ay - ry * ax

    for cf in contact_forces(scenario, frame, state.twist):
        g = cf.force
        p = cf.position
        ax, ay, az = float(g[0]), float(g[1]), float(g[2])
        rx = float(p[0]) - cx
        ry = float(p[1]) - cy
        rz = float(p[2]) - cz
        fx += ax
        fy += ay
        fz += az
        mx += ry * az - rz * ay
        my += rz * ax - rx * az
        mz += rx * ay - ry * ax

    return np.array([fx, fy, fz, mx, my, mz])


# ---------------------------------------------------------------------------
# integration


class ConfigCache:
    """Reuses the body-frame configuration while joint angles hold still.

    Forward kinematics and composite properties relative to the base
    depend only on the joint angles, so a run whose joints are parked
    (or ramped piecewise) can skip recomputing them most ticks.
    """

    __slots__ = ("angles", "frames", "props")

    def __init__(self):
        self.angles: Optional[dict[str, float]] = None
        self.frames: Optional[BodyFrames] = None
        self.props: Optional[CompositeProperties] = None


_QUAT_IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def _body_configuration(scenario: Scenario, joint_angles: Mapping[str, float],
                        cache: Optional[ConfigCache]):
    if cache is not None and cache.angles == joint_angles:
        return cache.frames, cache.props
    frames = forward_kinematics(
        scenario, Pose(np.zeros(3), _QUAT_IDENTITY), joint_angles)
    props = composite_properties(scenario, frames)
    if cache is not None:
        cache.angles = dict(joint_angles)
        cache.frames = frames
        cache.props = props
    return frames, props


def step(scenario: Scenario, state: SimState, tensions: Mapping[int, float],
         joint_angles_next: Optional[Mapping[str, float]] = None,
         frame: Optional[Frame] = None,
         return_frame: bool = False,
         cache: Optional[ConfigCache] = None):
    """Advance one timestep; returns the new state (and its Frame if asked)."""
    dt = scenario.sim.dt
    if frame is None:
        frame = compute_frame(scenario, state.pose, state.joint_angles)
    props = frame.props
    wrench = assemble_wrench(scenario, state, tensions, frame)

    v = state.twist.linear
    w = state.twist.angular
    accel = wrench[:3] / props.mass
    inertia = props.inertia
    # gyroscopic term keeps zero-torque flight momentum-conserving to O(dt)
    torque = wrench[3:] - _cross(w, inertia @ w)
    w_new = w + dt * _solve33(inertia, torque)
    v_new = v + dt * accel

    com_old = props.com
    com_new = com_old + dt * 0.5 * (v + v_new)

    dq = quat_from_rotvec(w_new * dt)
    q_new = quat_normalize(quat_multiply(dq, state.pose.orientation))

    if joint_angles_next is None:
        angles_new = dict(state.joint_angles)
    else:
        angles_new = {name: float(joint_angles_next.get(name, angle))
                      for name, angle in state.joint_angles.items()}

    # place the base so the integrated COM is honored at the new
    # configuration; the joint-dependent part is solved in the body frame
    # (cacheable) and mapped through the new world pose, since a rigid
    # motion moves every origin and the COM alike and conjugates inertia
    frames_body, props_body = _body_configuration(scenario, angles_new, cache)
    rot = quat_to_matrix(q_new)
    com_offset = rot @ props_body.com
    p_new = com_new - com_offset

    pose_new = Pose(position=p_new, orientation=q_new)
    frames_new = oriented_frames(frames_body, rot, p_new)
    props_new = CompositeProperties(
        mass=props_body.mass,
        com=p_new + com_offset,
        inertia=rot @ props_body.inertia @ rot.T,
    )
    frame_new = Frame(
        frames=frames_new,
        props=props_new,
        geometries=wire_geometries(scenario, frames_new),
    )
    lengths_new = {wid: geom.length for wid, geom in frame_new.geometries.items()}
    rates_new = {wid: (lengths_new[wid] - state.wire_lengths[wid]) / dt
                 for wid in lengths_new}

    state_new = SimState(
        t=state.t + dt,
        pose=pose_new,
        twist=Twist(linear=v_new, angular=w_new),
        joint_angles=angles_new,
        wire_lengths=lengths_new,
        wire_rates=rates_new,
    )

    probe = float(p_new.sum()) + float(q_new.sum()) \
        + float(v_new.sum()) + float(w_new.sum())
    if not math.isfinite(probe):
        for label, values in (("position", p_new), ("orientation", q_new),
                              ("linear velocity", v_new),
                              ("angular velocity", w_new)):
            if not np.all(np.isfinite(values)):
                raise NonFiniteStateError(
                    f"non-finite {label} at t = {state_new.t:.6g} s")
        raise NonFiniteStateError(
            f"non-finite state at t = {state_new.t:.6g} s")

    if return_frame:
        return state_new, frame_new
    return state_new


# ---------------------------------------------------------------------------
# diagnostics used by tests and the energy bookkeeping


def mechanical_energy(scenario: Scenario, state: SimState,
                      frame: Optional[Frame] = None) -> float:
    """Kinetic plus gravitational potential energy of the composite body."""
    if frame is None:
        frame = compute_frame(scenario, state.pose, state.joint_angles)
    props = frame.props
    v = state.twist.linear
    w = state.twist.angular
    kinetic = 0.5 * props.mass * float(v @ v) + 0.5 * float(w @ (props.inertia @ w))
    potential = props.mass * scenario.constants.gravity * float(props.com[2])
    return kinetic + potential


def angular_momentum(scenario: Scenario, state: SimState,
                     frame: Optional[Frame] = None) -> np.ndarray:
    """Angular momentum about the composite COM."""
    if frame is None:
        frame = compute_frame(scenario, state.pose, state.joint_angles)
    return frame.props.inertia @ state.twist.angular


def wire_power(tensions: Mapping[int, float],
               rates: Mapping[int, float]) -> float:
    """Power delivered to the body by the winches (winding in does work)."""
    return sum(-tensions.get(wid, 0.0) * rate for wid, rate in rates.items())

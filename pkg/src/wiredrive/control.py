"""Wire tension control: PD on length, gravity feedforward, torque budget.

The tension command for wire i is

    f_ref_i = clamp(kp * (l_i - l_ref_i) + kd * ldot_i + f_ff_i, 0, f_max_i)

Positive tension winds the wire in (shortens it), so a measured length
above the reference raises the command, and so does a lengthening rate:
both terms must push against pay-out for the winch loop to damp wire
velocity toward zero (tension enters the length dynamics with a minus
sign, which flips the usual PD signs).  The feedforward term solves a
box-constrained minimum-norm-squared distribution of the body weight over
the compensation wires:

    min sum f_i^2   s.t.   sum f_i * d_i = (0, 0, weight),  0 <= f_i <= f_max_i

where d_i is the net force direction of wire i per unit tension.  The
vertical row of the equality is hard: every returned distribution carries
the weight exactly.  Laterally the equality is best-effort, because a
wire set whose lines all lean the same way cannot cancel a lateral
component no matter the tensions, and the regulating controller absorbs
that remainder (physically, the pendulum restoring force).  Tensions are
therefore solved on the weight manifold: a particular solution along the
vertical row plus a damped lateral correction in its null space.  The
free solution is tried first; when it leaves the box, every bound/free
pattern is enumerated (at most 3^8 small closed-form solves) and the
candidates compete on lateral residual, then summed squared tension.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .kernel import pd_batch
from .kinematics import BodyFrames, WireGeometry, wire_geometries
from .model import ControllerGains, PhysicalConstants, Scenario, Wire

FREE, AT_ZERO, AT_MAX = 0, 1, 2

_BOUND_TOL = 1e-9          # slack allowed on 0 <= f <= f_max checks
_VERTICAL_TOL = 1e-9       # weight-balance feasibility, scaled by max(1, |w|);
#   the solve meets the vertical row exactly, so only rounding passes
_LATERAL_TOL = 1e-6        # lateral-residual grouping, same scaling
_LATERAL_DAMPING = 1e-6    # Tikhonov weight on the lateral correction; its
#   square root (1e-3 N of lateral force per N of tension) is the leverage
#   below which a lateral direction is surrendered to the regulating PD


class InfeasibleTension(RuntimeError):
    """No nonnegative, bounded tension set can balance the requested weight."""

    def __init__(self, weight: float, wire_ids: Sequence[int], reason: str):
        self.weight = weight
        self.wire_ids = list(wire_ids)
        self.reason = reason
        super().__init__(
            f"cannot distribute {weight:.6g} N over wires {self.wire_ids}: {reason}")


# ---------------------------------------------------------------------------
# minimum-norm distribution


def _vertical_null_basis(dz: np.ndarray) -> np.ndarray:
    """Orthonormal basis of tension moves that leave the carried weight fixed.

    Columns span the hyperplane orthogonal to the vertical row ``dz``
    (nonzero), built from the Householder reflection that maps the first
    coordinate axis onto ``dz``.
    """
    m = dz.shape[0]
    e = dz / math.sqrt(float(dz @ dz))
    u = e.copy()
    u[0] += 1.0 if e[0] >= 0.0 else -1.0
    c = 2.0 / float(u @ u)
    basis = np.empty((m, m - 1))
    for j in range(1, m):
        col = (-c * float(u[j])) * u
        col[j] += 1.0
        basis[:, j - 1] = col
    return basis


def _solve_on_weight_manifold(d: np.ndarray, target: np.ndarray,
                              z_tol: float) -> Optional[np.ndarray]:
    """Tensions meeting the vertical row exactly, with least lateral residual.

    The solution is a particular vector along the vertical row plus a
    damped lateral correction inside that row's null space, so the carried
    weight never trades against a lateral component the geometry cannot
    cancel.  Among lateral ties the damping picks the minimum-norm
    tensions.  Returns None when the columns have no vertical authority
    yet ``target`` asks for weight; box constraints are the caller's
    business.
    """
    m = d.shape[1]
    dz = d[2]
    nz2 = float(dz @ dz)
    tz = float(target[2])
    if nz2 < 1e-16:
        if abs(tz) > z_tol:
            return None
        f0 = np.zeros(m)
        basis = np.eye(m)
    else:
        f0 = dz * (tz / nz2)
        if m == 1:
            return f0
        basis = _vertical_null_basis(dz)
    lateral = d[:2] @ basis
    rhs = lateral.T @ (target[:2] - d[:2] @ f0)
    gram = lateral.T @ lateral
    n = gram.shape[0]
    gram[range(n), range(n)] += _LATERAL_DAMPING
    return f0 + basis @ np.linalg.solve(gram, rhs)


def solve_weight_distribution(d: np.ndarray, w: np.ndarray,
                              f_max: np.ndarray) -> np.ndarray:
    """Box-constrained minimum-norm-squared tensions with d @ f = w.

    The vertical row of the equality is met exactly; lateral rows are
    satisfied in the damped least-squares sense, because lines that all
    lean the same way cannot cancel a lateral force with nonnegative
    tensions.  When the free solution leaves the box, every bound/free
    pattern is enumerated; candidates compete on lateral residual, and
    within _LATERAL_TOL of the best the smallest sum of squared tensions
    wins.  Raises InfeasibleTension when no bound pattern carries the
    weight inside the box.
    """
    d = np.ascontiguousarray(d, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    f_max = np.asarray(f_max, dtype=float)
    k = d.shape[1]
    scale = max(1.0, float(np.max(np.abs(w))))
    z_tol = _VERTICAL_TOL * scale
    xy_tol = _LATERAL_TOL * scale

    f = _solve_on_weight_manifold(d, w, z_tol)
    if f is not None:
        in_box = True
        bounds = f_max.tolist()
        for j, value in enumerate(f.tolist()):
            if value < -_BOUND_TOL or value > bounds[j] + _BOUND_TOL:
                in_box = False
                break
        if in_box:
            return np.clip(f, 0.0, f_max)

    # Reachable-weight interval per pattern, used to prune the enumeration:
    # a fixed part from wires clamped at f_max plus the span of the free
    # wires' vertical contributions.
    dz_caps = [float(d[2, j]) * float(f_max[j]) for j in range(k)]
    wz = float(w[2])

    candidates: list[tuple[float, float, np.ndarray]] = []
    for pattern in itertools.product((FREE, AT_ZERO, AT_MAX), repeat=k):
        fixed = 0.0
        lo = 0.0
        hi = 0.0
        for j, state in enumerate(pattern):
            if state == AT_MAX:
                fixed += dz_caps[j]
            elif state == FREE:
                if dz_caps[j] >= 0.0:
                    hi += dz_caps[j]
                else:
                    lo += dz_caps[j]
        if wz - (fixed + hi) > z_tol or (fixed + lo) - wz > z_tol:
            continue
        f_try = np.zeros(k)
        target = w.copy()
        free_cols = []
        for j, state in enumerate(pattern):
            if state == AT_MAX:
                f_try[j] = f_max[j]
                target = target - f_max[j] * d[:, j]
            elif state == FREE:
                free_cols.append(j)
        if free_cols:
            x = _solve_on_weight_manifold(d[:, free_cols], target, z_tol)
            if x is None:
                continue
            out = False
            for idx, j in enumerate(free_cols):
                value = float(x[idx])
                if value < -_BOUND_TOL or value > f_max[j] + _BOUND_TOL:
                    out = True
                    break
                f_try[j] = min(max(value, 0.0), f_max[j])
            if out:
                continue
        res = d @ f_try - w
        if abs(float(res[2])) > z_tol:
            continue
        lateral = math.hypot(float(res[0]), float(res[1]))
        candidates.append((lateral, float(f_try @ f_try), f_try))
    if not candidates:
        raise InfeasibleTension(
            float(w[2]), list(range(k)),
            "no bound pattern carries the weight inside the tension box")
    floor_lateral = min(c[0] for c in candidates)
    best = min((c for c in candidates if c[0] <= floor_lateral + xy_tol),
               key=lambda c: c[1])
    return best[2]


def gravity_feedforward(wires: Sequence[Wire],
                        geometries: Mapping[int, WireGeometry],
                        com_world: np.ndarray,
                        weight: float) -> dict[int, float]:
    """Distribute ``weight`` newtons of upward force over the given wires.

    All wires must be environment-anchored; a body-anchored wire cannot
    push the body against the world no matter its tension.
    """
    del com_world  # the force balance is direction-only; kept for call symmetry
    if not wires:
        raise InfeasibleTension(weight, [], "compensation set is empty")
    ids = []
    for wire in wires:
        if not wire.anchor.is_environment:
            raise ValueError(
                f"wire {wire.id} is body-anchored and cannot carry weight")
        ids.append(wire.id)
    d = np.column_stack([geometries[w.id].net_force_direction for w in wires])
    f_max = np.array([w.f_max for w in wires])
    target = np.array([0.0, 0.0, float(weight)])
    try:
        f = solve_weight_distribution(d, target, f_max)
    except InfeasibleTension as exc:
        raise InfeasibleTension(weight, ids, exc.reason) from None
    return {wire.id: float(f[j]) for j, wire in enumerate(wires)}


# ---------------------------------------------------------------------------
# PD tension command


def tension_to_current(f_ref: float, constants: PhysicalConstants) -> float:
    """Winch motor current for a tension command, from the drivetrain model."""
    return f_ref * constants.pulley_radius / (
        constants.torque_constant * constants.gear_ratio)


@dataclass(frozen=True)
class TensionCommand:
    f_ref: Mapping[int, float]
    i_ref: Mapping[int, float]
    saturated: Mapping[int, bool]


def pd_tension(l_ref: Mapping[int, float],
               l: Mapping[int, float],
               l_rate: Mapping[int, float],
               gains: ControllerGains,
               f_ff: Mapping[int, float],
               f_max: Mapping[int, float],
               constants: PhysicalConstants) -> TensionCommand:
    """Per-wire PD-plus-feedforward command, clamped to [0, f_max]."""
    ids = list(l_ref)
    f, i, sat = pd_batch(
        np.array([l[w] for w in ids], dtype=float),
        np.array([l_ref[w] for w in ids], dtype=float),
        np.array([l_rate[w] for w in ids], dtype=float),
        np.array([f_ff.get(w, 0.0) for w in ids], dtype=float),
        np.array([f_max[w] for w in ids], dtype=float),
        gains.kp, gains.kd,
        constants.pulley_radius,
        constants.torque_constant * constants.gear_ratio,
    )
    return TensionCommand(
        f_ref={w: float(f[j]) for j, w in enumerate(ids)},
        i_ref={w: float(i[j]) for j, w in enumerate(ids)},
        saturated={w: bool(sat[j]) for j, w in enumerate(ids)},
    )


# ---------------------------------------------------------------------------
# joint torque budget


@dataclass(frozen=True)
class TorqueBudget:
    joint: str
    required: float             # actuator torque balancing wires + gravity
    wire_moment: float          # moment of wire forces on distal segments
    gravity_moment: float       # moment of distal segment weights
    distal_segments: tuple[str, ...]
    torque_limit: float

    @property
    def within_limit(self) -> bool:
        return abs(self.required) <= self.torque_limit


def distal_segments(scenario: Scenario, joint_name: str) -> tuple[str, ...]:
    """Segments on the child side of a joint, including the child itself."""
    joint = scenario.joint_map()[joint_name]
    children: dict[str, list[str]] = {}
    for j in scenario.joints:
        children.setdefault(j.parent, []).append(j.child)
    out = []
    stack = [joint.child]
    while stack:
        seg = stack.pop()
        out.append(seg)
        stack.extend(children.get(seg, ()))
    return tuple(sorted(out))


def joint_torque_budget(scenario: Scenario,
                        joint_name: str,
                        frames: BodyFrames,
                        tensions: Mapping[int, float],
                        geometries: Optional[Mapping[int, WireGeometry]] = None,
                        ) -> TorqueBudget:
    """Bookkeeping torque the joint actuator must supply about its axis.

    Joints are kinematically prescribed, so this does not feed back into
    the motion; it rationalizes how internal wires relieve a joint.
    """
    joint = scenario.joint_map()[joint_name]
    if geometries is None:
        geometries = wire_geometries(scenario, frames)
    distal = set(distal_segments(scenario, joint_name))

    parent_r = frames.rotations[joint.parent]
    origin = frames.origins[joint.parent] + parent_r @ joint.origin
    axis = parent_r @ joint.axis

    g_vec = np.array([0.0, 0.0, -scenario.constants.gravity])
    gravity_moment = 0.0
    for seg in scenario.segments:
        if seg.name in distal:
            lever = frames.segment_com(seg.name) - origin
            gravity_moment += float(np.cross(lever, seg.mass * g_vec) @ axis)

    wire_moment = 0.0
    for wid, tension in tensions.items():
        if tension == 0.0 or wid not in geometries:
            continue
        for app in geometries[wid].force_application:
            if app.segment in distal:
                lever = app.point - origin
                wire_moment += float(np.cross(lever, tension * app.direction) @ axis)

    required = -(gravity_moment + wire_moment)
    return TorqueBudget(
        joint=joint_name,
        required=required,
        wire_moment=wire_moment,
        gravity_moment=gravity_moment,
        distal_segments=tuple(sorted(distal)),
        torque_limit=joint.torque_limit,
    )

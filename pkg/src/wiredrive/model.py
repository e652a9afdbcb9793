"""Scenario schema: body model, wires, gains, phases, validation, serialization.

A scenario is a single JSON document with the top-level keys

    meta, constants, segments, joints, wires, gains, phases, sim,
    contact, kick_target

Unknown keys anywhere in the tree are a hard error, as are unresolved
cross-references (segment names, point names, wire ids, joint names).
Segment masses are treated as a distribution: on load they are rescaled
so their sum equals ``constants.total_mass``, which makes the total mass
a single overridable knob.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np

# Wire target modes inside a phase.  A numeric target is a signed length
# change over the phase (negative = wind in / shorten).
TRACK = "track"
HOLD = "hold"

WIRE_ID_MIN = 0
WIRE_ID_MAX = 7

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")

# ---------------------------------------------------------------------------
# violations


@dataclass(frozen=True)
class Violation:
    """One machine-readable validation finding."""

    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.path}: {self.message}"


class ScenarioError(ValueError):
    """Raised when a scenario document cannot be loaded or validated."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        lines = [str(v) for v in self.violations]
        super().__init__("invalid scenario:\n  " + "\n  ".join(lines))


# violation codes
PARSE_ERROR = "ParseError"
UNKNOWN_KEY = "UnknownKey"
MISSING_KEY = "MissingKey"
BAD_TYPE = "BadType"
BAD_VALUE = "BadValue"
INVALID_NAME = "InvalidName"
DUPLICATE_NAME = "DuplicateName"
DUPLICATE_WIRE_ID = "DuplicateWireId"
WIRE_ID_OUT_OF_RANGE = "WireIdOutOfRange"
NO_SEGMENTS = "NoSegments"
NO_WIRES = "NoWires"
NO_PHASES = "NoPhases"
UNRESOLVED_REFERENCE = "UnresolvedReference"
NON_POSITIVE_CONSTANT = "NonPositiveConstant"
NON_POSITIVE_MASS = "NonPositiveMass"
TIMESTEP_OUT_OF_RANGE = "TimestepOutOfRange"
NON_POSITIVE_DURATION = "NonPositiveDuration"
INERTIA_NOT_SYMMETRIC = "InertiaNotSymmetric"
INERTIA_INDEFINITE = "InertiaIndefinite"
AXIS_NOT_UNIT = "AxisNotUnit"
JOINT_LIMITS_UNORDERED = "JointLimitsUnordered"
SEGMENT_TREE_INVALID = "SegmentTreeInvalid"
ANGLE_OUT_OF_LIMITS = "AngleOutOfLimits"
GAINS_OUT_OF_RANGE = "GainsOutOfRange"
BAD_WIRE_TARGET = "BadWireTarget"
COMPENSATION_NOT_ENVIRONMENT = "CompensationNotEnvironment"
DEGENERATE_WIRE_ROUTE = "DegenerateWireRoute"
WIND_RATE_EXCEEDED = "WindRateExceeded"
KICK_TARGET_DEGENERATE = "KickTargetDegenerate"


# ---------------------------------------------------------------------------
# model types


@dataclass(frozen=True)
class PhysicalConstants:
    gravity: float = 9.81
    total_mass: float = 44.6
    f_max: float = 180.0           # default per-wire tension ceiling, N
    wind_rate_max: float = 0.242   # winch length-rate limit, m/s
    pulley_radius: float = 0.025   # m
    torque_constant: float = 0.1   # N*m/A
    gear_ratio: float = 5.0


@dataclass
class Pose:
    """Floating-base pose: position plus unit quaternion (w, x, y, z)."""

    position: np.ndarray
    orientation: np.ndarray

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.zeros(3), np.array([1.0, 0.0, 0.0, 0.0]))

    def copy(self) -> "Pose":
        return Pose(self.position.copy(), self.orientation.copy())


@dataclass
class Twist:
    """World-frame linear and angular velocity."""

    linear: np.ndarray
    angular: np.ndarray

    @staticmethod
    def zero() -> "Twist":
        return Twist(np.zeros(3), np.zeros(3))

    def copy(self) -> "Twist":
        return Twist(self.linear.copy(), self.angular.copy())


@dataclass(frozen=True)
class BodySegment:
    name: str
    mass: float
    com: np.ndarray                      # in segment frame
    inertia: np.ndarray                  # 3x3 about the segment COM
    attachment_points: Mapping[str, np.ndarray] = field(default_factory=dict)
    contact_points: Mapping[str, np.ndarray] = field(default_factory=dict)

    def point_local(self, name: str) -> np.ndarray:
        if name in self.attachment_points:
            return self.attachment_points[name]
        if name in self.contact_points:
            return self.contact_points[name]
        raise KeyError(f"segment {self.name!r} has no point {name!r}")


@dataclass(frozen=True)
class RevoluteJoint:
    name: str
    parent: str
    child: str
    origin: np.ndarray                   # joint origin in parent frame
    axis: np.ndarray                     # unit axis in parent frame
    limits: tuple[float, float] = (-math.pi, math.pi)
    torque_limit: float = math.inf


@dataclass(frozen=True)
class WireAnchor:
    """Far end of a wire: a world point or a point on a body segment."""

    world: Optional[np.ndarray] = None
    body: Optional[tuple[str, str]] = None

    @staticmethod
    def world_point(xyz: Sequence[float]) -> "WireAnchor":
        return WireAnchor(world=np.asarray(xyz, dtype=float))

    @staticmethod
    def body_point(segment: str, point: str) -> "WireAnchor":
        return WireAnchor(body=(segment, point))

    @property
    def is_environment(self) -> bool:
        return self.world is not None


@dataclass(frozen=True)
class Wire:
    id: int
    exit_point: tuple[str, str]          # (segment, point) where the wire leaves the winch
    via_points: tuple[tuple[str, str], ...]
    anchor: WireAnchor
    f_max: float = 180.0


@dataclass(frozen=True)
class ControllerGains:
    kp: float = 500.0   # N per m of length error
    kd: float = 50.0    # N per m/s of length rate


WireTarget = Union[float, str]  # float delta-length, TRACK, or HOLD


@dataclass(frozen=True)
class Phase:
    name: str
    duration: float
    wire_targets: Mapping[int, WireTarget] = field(default_factory=dict)
    compensation: tuple[int, ...] = ()
    joint_targets: Mapping[str, float] = field(default_factory=dict)
    sync_barrier: bool = False


@dataclass(frozen=True)
class SimSettings:
    dt: float = 0.001
    duration: float = 0.0
    base_position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    base_rpy: np.ndarray = field(default_factory=lambda: np.zeros(3))
    joint_angles: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ContactSettings:
    enabled: bool = False
    stiffness: float = 5.0e4            # N/m of penetration
    damping: float = 5.0e3              # N*s/m, normal rate
    tangential_damping: float = 200.0   # N*s/m, horizontal slip


@dataclass(frozen=True)
class KickTarget:
    point: np.ndarray
    normal: np.ndarray
    foot: tuple[str, str]                # (segment, contact point)


@dataclass(frozen=True)
class ScenarioMeta:
    name: str = ""
    notes: tuple[str, ...] = ()


@dataclass
class Scenario:
    meta: ScenarioMeta
    constants: PhysicalConstants
    segments: tuple[BodySegment, ...]
    joints: tuple[RevoluteJoint, ...]
    wires: tuple[Wire, ...]
    gains: ControllerGains
    phases: tuple[Phase, ...]
    sim: SimSettings
    contact: ContactSettings
    kick_target: Optional[KickTarget] = None

    def segment_map(self) -> dict[str, BodySegment]:
        return {s.name: s for s in self.segments}

    def joint_map(self) -> dict[str, RevoluteJoint]:
        return {j.name: j for j in self.joints}

    def wire_map(self) -> dict[int, Wire]:
        return {w.id: w for w in self.wires}

    def root_segment(self) -> str:
        children = {j.child for j in self.joints}
        roots = [s.name for s in self.segments if s.name not in children]
        if len(roots) != 1:
            raise ScenarioError([Violation(
                SEGMENT_TREE_INVALID, "joints",
                f"expected exactly one root segment, found {roots!r}")])
        return roots[0]


# ---------------------------------------------------------------------------
# parsing helpers


class _Ctx:
    """Collects violations while descending the document tree."""

    def __init__(self) -> None:
        self.violations: list[Violation] = []

    def add(self, code: str, path: str, message: str) -> None:
        self.violations.append(Violation(code, path, message))

    def raise_if_any(self) -> None:
        if self.violations:
            raise ScenarioError(self.violations)


def _check_keys(ctx: _Ctx, node: Mapping, path: str, known: Sequence[str],
                required: Sequence[str] = ()) -> bool:
    if not isinstance(node, Mapping):
        ctx.add(BAD_TYPE, path, f"expected an object, got {type(node).__name__}")
        return False
    ok = True
    for key in node:
        if key not in known:
            ctx.add(UNKNOWN_KEY, f"{path}.{key}", f"unknown key {key!r}")
            ok = False
    for key in required:
        if key not in node:
            ctx.add(MISSING_KEY, f"{path}.{key}", f"missing required key {key!r}")
            ok = False
    return ok


def _number(ctx: _Ctx, node: Any, path: str, default: Optional[float] = None) -> float:
    if node is None and default is not None:
        return default
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        ctx.add(BAD_TYPE, path, f"expected a number, got {node!r}")
        return math.nan
    return float(node)


def _vec3(ctx: _Ctx, node: Any, path: str,
          default: Optional[Sequence[float]] = None) -> np.ndarray:
    if node is None and default is not None:
        return np.asarray(default, dtype=float)
    if (not isinstance(node, Sequence) or isinstance(node, str) or len(node) != 3
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in node)):
        ctx.add(BAD_TYPE, path, f"expected a list of 3 numbers, got {node!r}")
        return np.full(3, math.nan)
    return np.asarray([float(v) for v in node], dtype=float)


def _mat33(ctx: _Ctx, node: Any, path: str) -> np.ndarray:
    bad = np.full((3, 3), math.nan)
    if not isinstance(node, Sequence) or isinstance(node, str) or len(node) != 3:
        ctx.add(BAD_TYPE, path, f"expected a 3x3 matrix, got {node!r}")
        return bad
    rows = []
    for i, row in enumerate(node):
        rows.append(_vec3(ctx, row, f"{path}[{i}]"))
    return np.vstack(rows)


def _name(ctx: _Ctx, node: Any, path: str) -> str:
    if not isinstance(node, str):
        ctx.add(BAD_TYPE, path, f"expected a string, got {node!r}")
        return ""
    if not _NAME_RE.match(node):
        ctx.add(INVALID_NAME, path,
                f"{node!r} must match {_NAME_RE.pattern} (keeps CSV and references clean)")
    return node


def _seg_point(ctx: _Ctx, node: Any, path: str) -> tuple[str, str]:
    if (not isinstance(node, Sequence) or isinstance(node, str) or len(node) != 2
            or not all(isinstance(v, str) for v in node)):
        ctx.add(BAD_TYPE, path, f"expected [segment, point], got {node!r}")
        return ("", "")
    return (node[0], node[1])


def _point_table(ctx: _Ctx, node: Any, path: str) -> dict[str, np.ndarray]:
    if node is None:
        return {}
    if not isinstance(node, Mapping):
        ctx.add(BAD_TYPE, path, f"expected an object of named points, got {node!r}")
        return {}
    out = {}
    for key, value in node.items():
        _name(ctx, key, f"{path}.{key}")
        out[key] = _vec3(ctx, value, f"{path}.{key}")
    return out


# ---------------------------------------------------------------------------
# document -> Scenario


def scenario_from_dict(tree: Mapping[str, Any]) -> Scenario:
    """Build and validate a Scenario from a parsed document tree."""

    ctx = _Ctx()
    _check_keys(ctx, tree, "$",
                ["meta", "constants", "segments", "joints", "wires", "gains",
                 "phases", "sim", "contact", "kick_target"],
                required=["segments", "wires", "phases"])
    ctx.raise_if_any()

    meta_node = tree.get("meta", {})
    _check_keys(ctx, meta_node, "meta", ["name", "notes"])
    notes = meta_node.get("notes", [])
    if not isinstance(notes, Sequence) or isinstance(notes, str) or \
            any(not isinstance(n, str) for n in notes):
        ctx.add(BAD_TYPE, "meta.notes", "expected a list of strings")
        notes = []
    meta = ScenarioMeta(name=str(meta_node.get("name", "")), notes=tuple(notes))

    c_node = tree.get("constants", {})
    _check_keys(ctx, c_node, "constants",
                ["gravity", "total_mass", "f_max", "wind_rate_max",
                 "pulley_radius", "torque_constant", "gear_ratio"])
    defaults = PhysicalConstants()
    constants = PhysicalConstants(
        gravity=_number(ctx, c_node.get("gravity"), "constants.gravity", defaults.gravity),
        total_mass=_number(ctx, c_node.get("total_mass"), "constants.total_mass",
                           defaults.total_mass),
        f_max=_number(ctx, c_node.get("f_max"), "constants.f_max", defaults.f_max),
        wind_rate_max=_number(ctx, c_node.get("wind_rate_max"),
                              "constants.wind_rate_max", defaults.wind_rate_max),
        pulley_radius=_number(ctx, c_node.get("pulley_radius"),
                              "constants.pulley_radius", defaults.pulley_radius),
        torque_constant=_number(ctx, c_node.get("torque_constant"),
                                "constants.torque_constant", defaults.torque_constant),
        gear_ratio=_number(ctx, c_node.get("gear_ratio"),
                           "constants.gear_ratio", defaults.gear_ratio),
    )

    segments = []
    seg_node = tree.get("segments", [])
    if not isinstance(seg_node, Sequence) or isinstance(seg_node, str):
        ctx.add(BAD_TYPE, "segments", "expected a list of segments")
        seg_node = []
    for i, node in enumerate(seg_node):
        path = f"segments[{i}]"
        if not _check_keys(ctx, node, path,
                           ["name", "mass", "com", "inertia",
                            "attachment_points", "contact_points"],
                           required=["name", "mass", "inertia"]):
            continue
        segments.append(BodySegment(
            name=_name(ctx, node.get("name", ""), f"{path}.name"),
            mass=_number(ctx, node.get("mass"), f"{path}.mass"),
            com=_vec3(ctx, node.get("com"), f"{path}.com", default=(0.0, 0.0, 0.0)),
            inertia=_mat33(ctx, node.get("inertia"), f"{path}.inertia"),
            attachment_points=_point_table(ctx, node.get("attachment_points"),
                                           f"{path}.attachment_points"),
            contact_points=_point_table(ctx, node.get("contact_points"),
                                        f"{path}.contact_points"),
        ))

    joints = []
    joint_node = tree.get("joints", [])
    if not isinstance(joint_node, Sequence) or isinstance(joint_node, str):
        ctx.add(BAD_TYPE, "joints", "expected a list of joints")
        joint_node = []
    for i, node in enumerate(joint_node):
        path = f"joints[{i}]"
        if not _check_keys(ctx, node, path,
                           ["name", "parent", "child", "origin", "axis",
                            "limits", "torque_limit"],
                           required=["name", "parent", "child", "origin", "axis"]):
            continue
        limits_node = node.get("limits", (-math.pi, math.pi))
        if (not isinstance(limits_node, Sequence) or isinstance(limits_node, str)
                or len(limits_node) != 2):
            ctx.add(BAD_TYPE, f"{path}.limits", "expected [lo, hi]")
            limits_node = (-math.pi, math.pi)
        joints.append(RevoluteJoint(
            name=_name(ctx, node.get("name", ""), f"{path}.name"),
            parent=str(node.get("parent", "")),
            child=str(node.get("child", "")),
            origin=_vec3(ctx, node.get("origin"), f"{path}.origin"),
            axis=_vec3(ctx, node.get("axis"), f"{path}.axis"),
            limits=(_number(ctx, limits_node[0], f"{path}.limits[0]"),
                    _number(ctx, limits_node[1], f"{path}.limits[1]")),
            torque_limit=_number(ctx, node.get("torque_limit"),
                                 f"{path}.torque_limit", math.inf),
        ))

    wires = []
    wire_node = tree.get("wires", [])
    if not isinstance(wire_node, Sequence) or isinstance(wire_node, str):
        ctx.add(BAD_TYPE, "wires", "expected a list of wires")
        wire_node = []
    for i, node in enumerate(wire_node):
        path = f"wires[{i}]"
        if not _check_keys(ctx, node, path,
                           ["id", "exit", "via", "anchor", "f_max"],
                           required=["id", "exit", "anchor"]):
            continue
        wid = node.get("id")
        if isinstance(wid, bool) or not isinstance(wid, int):
            ctx.add(BAD_TYPE, f"{path}.id", f"expected an integer id, got {wid!r}")
            continue
        via_node = node.get("via", [])
        if not isinstance(via_node, Sequence) or isinstance(via_node, str):
            ctx.add(BAD_TYPE, f"{path}.via", "expected a list of [segment, point]")
            via_node = []
        via = tuple(_seg_point(ctx, v, f"{path}.via[{j}]") for j, v in enumerate(via_node))
        anchor_node = node.get("anchor", {})
        anchor = WireAnchor()
        if _check_keys(ctx, anchor_node, f"{path}.anchor", ["world", "body"]):
            has_world = "world" in anchor_node
            has_body = "body" in anchor_node
            if has_world == has_body:
                ctx.add(BAD_VALUE, f"{path}.anchor",
                        "anchor needs exactly one of 'world' or 'body'")
            elif has_world:
                anchor = WireAnchor(world=_vec3(ctx, anchor_node["world"],
                                                f"{path}.anchor.world"))
            else:
                anchor = WireAnchor(body=_seg_point(ctx, anchor_node["body"],
                                                    f"{path}.anchor.body"))
        wires.append(Wire(
            id=wid,
            exit_point=_seg_point(ctx, node.get("exit"), f"{path}.exit"),
            via_points=via,
            anchor=anchor,
            f_max=_number(ctx, node.get("f_max"), f"{path}.f_max", constants.f_max),
        ))

    g_node = tree.get("gains", {})
    _check_keys(ctx, g_node, "gains", ["kp", "kd"])
    gains = ControllerGains(
        kp=_number(ctx, g_node.get("kp"), "gains.kp", ControllerGains.kp),
        kd=_number(ctx, g_node.get("kd"), "gains.kd", ControllerGains.kd),
    )

    phases = []
    phase_node = tree.get("phases", [])
    if not isinstance(phase_node, Sequence) or isinstance(phase_node, str):
        ctx.add(BAD_TYPE, "phases", "expected a list of phases")
        phase_node = []
    for i, node in enumerate(phase_node):
        path = f"phases[{i}]"
        if not _check_keys(ctx, node, path,
                           ["name", "duration", "wire_targets", "compensation",
                            "joint_targets", "sync_barrier"],
                           required=["name", "duration"]):
            continue
        targets: dict[int, WireTarget] = {}
        t_node = node.get("wire_targets", {})
        if not isinstance(t_node, Mapping):
            ctx.add(BAD_TYPE, f"{path}.wire_targets", "expected an object keyed by wire id")
            t_node = {}
        for key, value in t_node.items():
            tpath = f"{path}.wire_targets.{key}"
            try:
                wid = int(key)
            except (TypeError, ValueError):
                ctx.add(BAD_TYPE, tpath, f"wire id key {key!r} is not an integer")
                continue
            if isinstance(value, str):
                if value not in (TRACK, HOLD):
                    ctx.add(BAD_WIRE_TARGET, tpath,
                            f"string target must be '{TRACK}' or '{HOLD}', got {value!r}")
                    continue
                targets[wid] = value
            elif isinstance(value, bool) or not isinstance(value, (int, float)):
                ctx.add(BAD_WIRE_TARGET, tpath,
                        f"expected a length delta or '{TRACK}'/'{HOLD}', got {value!r}")
            else:
                targets[wid] = float(value)
        comp_node = node.get("compensation", [])
        if (not isinstance(comp_node, Sequence) or isinstance(comp_node, str)
                or any(isinstance(v, bool) or not isinstance(v, int) for v in comp_node)):
            ctx.add(BAD_TYPE, f"{path}.compensation", "expected a list of wire ids")
            comp_node = []
        jt_node = node.get("joint_targets", {})
        if not isinstance(jt_node, Mapping):
            ctx.add(BAD_TYPE, f"{path}.joint_targets", "expected an object keyed by joint")
            jt_node = {}
        joint_targets = {str(k): _number(ctx, v, f"{path}.joint_targets.{k}")
                         for k, v in jt_node.items()}
        barrier = node.get("sync_barrier", False)
        if not isinstance(barrier, bool):
            ctx.add(BAD_TYPE, f"{path}.sync_barrier", "expected true/false")
            barrier = False
        phases.append(Phase(
            name=_name(ctx, node.get("name", ""), f"{path}.name"),
            duration=_number(ctx, node.get("duration"), f"{path}.duration"),
            wire_targets=targets,
            compensation=tuple(comp_node),
            joint_targets=joint_targets,
            sync_barrier=barrier,
        ))

    s_node = tree.get("sim", {})
    _check_keys(ctx, s_node, "sim",
                ["dt", "duration", "base_position", "base_rpy", "joint_angles"])
    ja_node = s_node.get("joint_angles", {})
    if not isinstance(ja_node, Mapping):
        ctx.add(BAD_TYPE, "sim.joint_angles", "expected an object keyed by joint")
        ja_node = {}
    phase_total = sum(p.duration for p in phases if math.isfinite(p.duration))
    sim = SimSettings(
        dt=_number(ctx, s_node.get("dt"), "sim.dt", 0.001),
        duration=_number(ctx, s_node.get("duration"), "sim.duration", phase_total),
        base_position=_vec3(ctx, s_node.get("base_position"), "sim.base_position",
                            default=(0.0, 0.0, 0.0)),
        base_rpy=_vec3(ctx, s_node.get("base_rpy"), "sim.base_rpy",
                       default=(0.0, 0.0, 0.0)),
        joint_angles={str(k): _number(ctx, v, f"sim.joint_angles.{k}")
                      for k, v in ja_node.items()},
    )

    contact_node = tree.get("contact", {})
    _check_keys(ctx, contact_node, "contact",
                ["enabled", "stiffness", "damping", "tangential_damping"])
    enabled = contact_node.get("enabled", False)
    if not isinstance(enabled, bool):
        ctx.add(BAD_TYPE, "contact.enabled", "expected true/false")
        enabled = False
    cdef = ContactSettings()
    contact = ContactSettings(
        enabled=enabled,
        stiffness=_number(ctx, contact_node.get("stiffness"), "contact.stiffness",
                          cdef.stiffness),
        damping=_number(ctx, contact_node.get("damping"), "contact.damping",
                        cdef.damping),
        tangential_damping=_number(ctx, contact_node.get("tangential_damping"),
                                   "contact.tangential_damping",
                                   cdef.tangential_damping),
    )

    kick_target = None
    if tree.get("kick_target") is not None:
        k_node = tree["kick_target"]
        if _check_keys(ctx, k_node, "kick_target", ["point", "normal", "foot"],
                       required=["point", "normal", "foot"]):
            kick_target = KickTarget(
                point=_vec3(ctx, k_node.get("point"), "kick_target.point"),
                normal=_vec3(ctx, k_node.get("normal"), "kick_target.normal"),
                foot=_seg_point(ctx, k_node.get("foot"), "kick_target.foot"),
            )

    ctx.raise_if_any()

    # Segment masses define a distribution; constants.total_mass sets the scale.
    raw_total = sum(s.mass for s in segments)
    if raw_total > 0 and constants.total_mass > 0:
        factor = constants.total_mass / raw_total
        # A factor within rounding of 1 means the masses already sum to the
        # total; skip so that serialize -> load is an exact fixed point.
        if abs(factor - 1.0) > 1e-12:
            segments = [
                BodySegment(s.name, s.mass * factor, s.com, s.inertia,
                            s.attachment_points, s.contact_points)
                for s in segments
            ]

    scenario = Scenario(
        meta=meta,
        constants=constants,
        segments=tuple(segments),
        joints=tuple(joints),
        wires=tuple(wires),
        gains=gains,
        phases=tuple(phases),
        sim=sim,
        contact=contact,
        kick_target=kick_target,
    )
    violations = validate_scenario(scenario)
    if violations:
        raise ScenarioError(violations)
    return scenario


def load_scenario(text: str) -> Scenario:
    """Parse a JSON scenario document and validate it.

    Raises ScenarioError carrying machine-readable violations; JSON syntax
    errors surface as a single ParseError violation with line/column.
    """
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([Violation(
            PARSE_ERROR, f"line {exc.lineno}, column {exc.colno}", exc.msg)]) from exc
    if not isinstance(tree, dict):
        raise ScenarioError([Violation(BAD_TYPE, "$", "document root must be an object")])
    return scenario_from_dict(tree)


# ---------------------------------------------------------------------------
# semantic validation


def validate_scenario(s: Scenario) -> list[Violation]:
    """Check cross-references and numeric invariants; return all findings."""

    ctx = _Ctx()

    for fname in ("gravity", "total_mass", "f_max", "wind_rate_max",
                  "pulley_radius", "torque_constant", "gear_ratio"):
        value = getattr(s.constants, fname)
        if not (value > 0) or not math.isfinite(value):
            ctx.add(NON_POSITIVE_CONSTANT, f"constants.{fname}",
                    f"{fname} must be finite and > 0, got {value!r}")

    if not s.segments:
        ctx.add(NO_SEGMENTS, "segments", "at least one segment is required")
    if not s.wires:
        ctx.add(NO_WIRES, "wires", "at least one wire is required")
    if not s.phases:
        ctx.add(NO_PHASES, "phases", "at least one phase is required")

    seg_names: set[str] = set()
    for i, seg in enumerate(s.segments):
        path = f"segments[{i}]"
        if seg.name in seg_names:
            ctx.add(DUPLICATE_NAME, f"{path}.name", f"duplicate segment {seg.name!r}")
        seg_names.add(seg.name)
        if not (seg.mass > 0) or not math.isfinite(seg.mass):
            ctx.add(NON_POSITIVE_MASS, f"{path}.mass",
                    f"segment mass must be > 0, got {seg.mass!r}")
        inertia = np.asarray(seg.inertia, dtype=float)
        if not np.all(np.isfinite(inertia)):
            ctx.add(BAD_VALUE, f"{path}.inertia", "inertia has non-finite entries")
        elif not np.allclose(inertia, inertia.T, atol=1e-9):
            ctx.add(INERTIA_NOT_SYMMETRIC, f"{path}.inertia",
                    "inertia matrix must be symmetric")
        elif np.min(np.linalg.eigvalsh(inertia)) < -1e-9:
            ctx.add(INERTIA_INDEFINITE, f"{path}.inertia",
                    "inertia matrix must be positive semidefinite")

    joint_names: set[str] = set()
    child_count: dict[str, int] = {}
    for i, joint in enumerate(s.joints):
        path = f"joints[{i}]"
        if joint.name in joint_names:
            ctx.add(DUPLICATE_NAME, f"{path}.name", f"duplicate joint {joint.name!r}")
        joint_names.add(joint.name)
        for end, seg in (("parent", joint.parent), ("child", joint.child)):
            if seg not in seg_names:
                ctx.add(UNRESOLVED_REFERENCE, f"{path}.{end}",
                        f"unknown segment {seg!r}")
        norm = float(np.linalg.norm(joint.axis))
        if abs(norm - 1.0) > 1e-9:
            ctx.add(AXIS_NOT_UNIT, f"{path}.axis",
                    f"axis must be a unit vector, |axis| = {norm:.12g}")
        lo, hi = joint.limits
        if not (lo < hi):
            ctx.add(JOINT_LIMITS_UNORDERED, f"{path}.limits",
                    f"limits must satisfy lo < hi, got [{lo!r}, {hi!r}]")
        if not (joint.torque_limit > 0):
            ctx.add(BAD_VALUE, f"{path}.torque_limit",
                    f"torque limit must be > 0, got {joint.torque_limit!r}")
        child_count[joint.child] = child_count.get(joint.child, 0) + 1

    # tree shape: every segment except one root has exactly one parent joint
    for seg, count in child_count.items():
        if count > 1:
            ctx.add(SEGMENT_TREE_INVALID, "joints",
                    f"segment {seg!r} is the child of {count} joints")
    roots = [name for name in seg_names if child_count.get(name, 0) == 0]
    if s.segments and len(roots) != 1:
        ctx.add(SEGMENT_TREE_INVALID, "joints",
                f"expected exactly one root segment, found {sorted(roots)!r}")
    elif s.joints:
        # reachability from the root; a cycle or an island never gets visited
        parent_of = {j.child: j.parent for j in s.joints}
        for name in seg_names:
            seen: set[str] = set()
            cursor = name
            while cursor in parent_of and cursor not in seen:
                seen.add(cursor)
                cursor = parent_of[cursor]
            if cursor != roots[0]:
                ctx.add(SEGMENT_TREE_INVALID, "joints",
                        f"segment {name!r} does not chain back to the root")

    segments = {seg.name: seg for seg in s.segments}

    def check_point(path: str, ref: tuple[str, str], contact_only: bool = False) -> None:
        seg, point = ref
        if seg not in segments:
            ctx.add(UNRESOLVED_REFERENCE, path, f"unknown segment {seg!r}")
            return
        table: Mapping[str, np.ndarray]
        if contact_only:
            table = segments[seg].contact_points
        else:
            table = {**segments[seg].attachment_points, **segments[seg].contact_points}
        if point not in table:
            kind = "contact point" if contact_only else "point"
            ctx.add(UNRESOLVED_REFERENCE, path,
                    f"segment {seg!r} has no {kind} {point!r}")

    wire_ids: set[int] = set()
    env_wires: set[int] = set()
    for i, wire in enumerate(s.wires):
        path = f"wires[{i}]"
        if wire.id in wire_ids:
            ctx.add(DUPLICATE_WIRE_ID, f"{path}.id", f"duplicate wire id {wire.id}")
        wire_ids.add(wire.id)
        if not (WIRE_ID_MIN <= wire.id <= WIRE_ID_MAX):
            ctx.add(WIRE_ID_OUT_OF_RANGE, f"{path}.id",
                    f"wire id must be in [{WIRE_ID_MIN}, {WIRE_ID_MAX}], got {wire.id}")
        check_point(f"{path}.exit", wire.exit_point)
        for j, via in enumerate(wire.via_points):
            check_point(f"{path}.via[{j}]", via)
        if wire.anchor.is_environment:
            env_wires.add(wire.id)
        elif wire.anchor.body is not None:
            check_point(f"{path}.anchor.body", wire.anchor.body)
        route = [wire.exit_point, *wire.via_points]
        if wire.anchor.body is not None:
            route.append(wire.anchor.body)
        for j in range(len(route) - 1):
            if route[j] == route[j + 1]:
                ctx.add(DEGENERATE_WIRE_ROUTE, f"{path}.via",
                        f"consecutive routing points {route[j]!r} coincide")
        if not (wire.f_max > 0) or not math.isfinite(wire.f_max):
            ctx.add(NON_POSITIVE_CONSTANT, f"{path}.f_max",
                    f"f_max must be finite and > 0, got {wire.f_max!r}")

    if not (s.gains.kp > 0) or not (s.gains.kd >= 0):
        ctx.add(GAINS_OUT_OF_RANGE, "gains",
                f"need kp > 0 and kd >= 0, got kp={s.gains.kp!r} kd={s.gains.kd!r}")

    joints = {j.name: j for j in s.joints}
    for i, phase in enumerate(s.phases):
        path = f"phases[{i}]"
        if not (phase.duration > 0) or not math.isfinite(phase.duration):
            ctx.add(NON_POSITIVE_DURATION, f"{path}.duration",
                    f"phase duration must be > 0, got {phase.duration!r}")
        for wid, target in phase.wire_targets.items():
            tpath = f"{path}.wire_targets.{wid}"
            if wid not in wire_ids:
                ctx.add(UNRESOLVED_REFERENCE, tpath, f"unknown wire id {wid}")
            if isinstance(target, str):
                if target not in (TRACK, HOLD):
                    ctx.add(BAD_WIRE_TARGET, tpath, f"bad target {target!r}")
            elif phase.duration > 0:
                rate = abs(target) / phase.duration
                if rate > s.constants.wind_rate_max * (1 + 1e-9):
                    ctx.add(WIND_RATE_EXCEEDED, tpath,
                            f"|{target}| / {phase.duration} s = {rate:.6g} m/s exceeds "
                            f"wind_rate_max = {s.constants.wind_rate_max} m/s")
        for wid in phase.compensation:
            cpath = f"{path}.compensation"
            if wid not in wire_ids:
                ctx.add(UNRESOLVED_REFERENCE, cpath, f"unknown wire id {wid}")
            elif wid not in env_wires:
                ctx.add(COMPENSATION_NOT_ENVIRONMENT, cpath,
                        f"wire {wid} is body-anchored and cannot carry weight "
                        "against the environment")
        for jname, angle in phase.joint_targets.items():
            jpath = f"{path}.joint_targets.{jname}"
            if jname not in joints:
                ctx.add(UNRESOLVED_REFERENCE, jpath, f"unknown joint {jname!r}")
            else:
                lo, hi = joints[jname].limits
                if not (lo - 1e-9 <= angle <= hi + 1e-9):
                    ctx.add(ANGLE_OUT_OF_LIMITS, jpath,
                            f"target {angle!r} outside limits [{lo}, {hi}]")

    if not (0.0 < s.sim.dt <= 0.01):
        ctx.add(TIMESTEP_OUT_OF_RANGE, "sim.dt",
                f"dt must be in (0, 0.01] s, got {s.sim.dt!r}")
    if not (s.sim.duration > 0) or not math.isfinite(s.sim.duration):
        ctx.add(NON_POSITIVE_DURATION, "sim.duration",
                f"duration must be > 0, got {s.sim.duration!r}")
    for jname, angle in s.sim.joint_angles.items():
        jpath = f"sim.joint_angles.{jname}"
        if jname not in joints:
            ctx.add(UNRESOLVED_REFERENCE, jpath, f"unknown joint {jname!r}")
        else:
            lo, hi = joints[jname].limits
            if not (lo - 1e-9 <= angle <= hi + 1e-9):
                ctx.add(ANGLE_OUT_OF_LIMITS, jpath,
                        f"initial angle {angle!r} outside limits [{lo}, {hi}]")

    for fname in ("stiffness", "damping", "tangential_damping"):
        value = getattr(s.contact, fname)
        if not (value >= 0) or not math.isfinite(value):
            ctx.add(BAD_VALUE, f"contact.{fname}",
                    f"{fname} must be finite and >= 0, got {value!r}")

    if s.kick_target is not None:
        if float(np.linalg.norm(s.kick_target.normal)) < 1e-9:
            ctx.add(KICK_TARGET_DEGENERATE, "kick_target.normal",
                    "plane normal must be nonzero")
        check_point("kick_target.foot", s.kick_target.foot, contact_only=True)

    return ctx.violations


# ---------------------------------------------------------------------------
# Scenario -> document


def _round_trip_floats(vec: np.ndarray) -> list[float]:
    return [float(v) for v in np.asarray(vec).ravel()]


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    """Canonical document tree, inverse of scenario_from_dict up to key order."""

    tree: dict[str, Any] = {}
    if s.meta.name or s.meta.notes:
        tree["meta"] = {"name": s.meta.name, "notes": list(s.meta.notes)}
    tree["constants"] = {
        "gravity": s.constants.gravity,
        "total_mass": s.constants.total_mass,
        "f_max": s.constants.f_max,
        "wind_rate_max": s.constants.wind_rate_max,
        "pulley_radius": s.constants.pulley_radius,
        "torque_constant": s.constants.torque_constant,
        "gear_ratio": s.constants.gear_ratio,
    }
    tree["segments"] = [
        {
            "name": seg.name,
            "mass": seg.mass,
            "com": _round_trip_floats(seg.com),
            "inertia": [_round_trip_floats(row) for row in np.asarray(seg.inertia)],
            "attachment_points": {k: _round_trip_floats(v)
                                  for k, v in seg.attachment_points.items()},
            "contact_points": {k: _round_trip_floats(v)
                               for k, v in seg.contact_points.items()},
        }
        for seg in s.segments
    ]
    tree["joints"] = [
        {
            "name": j.name,
            "parent": j.parent,
            "child": j.child,
            "origin": _round_trip_floats(j.origin),
            "axis": _round_trip_floats(j.axis),
            "limits": [j.limits[0], j.limits[1]],
            **({} if math.isinf(j.torque_limit) else {"torque_limit": j.torque_limit}),
        }
        for j in s.joints
    ]
    tree["wires"] = [
        {
            "id": w.id,
            "exit": list(w.exit_point),
            "via": [list(v) for v in w.via_points],
            "anchor": ({"world": _round_trip_floats(w.anchor.world)}
                       if w.anchor.is_environment
                       else {"body": list(w.anchor.body)}),
            "f_max": w.f_max,
        }
        for w in s.wires
    ]
    tree["gains"] = {"kp": s.gains.kp, "kd": s.gains.kd}
    tree["phases"] = [
        {
            "name": p.name,
            "duration": p.duration,
            "wire_targets": {str(k): v for k, v in sorted(p.wire_targets.items())},
            "compensation": list(p.compensation),
            "joint_targets": dict(sorted(p.joint_targets.items())),
            "sync_barrier": p.sync_barrier,
        }
        for p in s.phases
    ]
    tree["sim"] = {
        "dt": s.sim.dt,
        "duration": s.sim.duration,
        "base_position": _round_trip_floats(s.sim.base_position),
        "base_rpy": _round_trip_floats(s.sim.base_rpy),
        "joint_angles": dict(sorted(s.sim.joint_angles.items())),
    }
    tree["contact"] = {
        "enabled": s.contact.enabled,
        "stiffness": s.contact.stiffness,
        "damping": s.contact.damping,
        "tangential_damping": s.contact.tangential_damping,
    }
    if s.kick_target is not None:
        tree["kick_target"] = {
            "point": _round_trip_floats(s.kick_target.point),
            "normal": _round_trip_floats(s.kick_target.normal),
            "foot": list(s.kick_target.foot),
        }
    return tree


def serialize_scenario(s: Scenario) -> str:
    """Serialize to the canonical JSON form used by emit-scenario and hashing."""
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"

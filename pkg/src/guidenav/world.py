"""Deterministic 2D indoor world: static obstacles, scripted pedestrians,
unicycle robot kinematics and the rigidly attached handler.

Conventions: robot frame has +x forward and +y to the robot's LEFT.  Positive
curvature and positive lateral speed both point to the robot's RIGHT, so a
right-turn command carries positive sign end to end.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from shapely.geometry import Point, Polygon

from .config import HandlerConfig, RobotConfig


class ScenarioError(ValueError):
    """Malformed or invariant-violating scenario description."""


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.remainder(a, math.tau)
    return math.pi if r <= -math.pi else r


@dataclass(frozen=True)
class CircleShape:
    cx: float
    cy: float
    radius: float


@dataclass(frozen=True)
class PolygonShape:
    vertices: tuple[tuple[float, float], ...]   # CCW

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=np.float64)


@dataclass(frozen=True)
class Obstacle:
    obstacle_id: str
    class_id: int
    height: float
    shape: CircleShape | PolygonShape


@dataclass(frozen=True)
class PedestrianAgent:
    """Disc agent walking a polyline route at constant speed."""

    agent_id: str
    route: tuple[tuple[float, float], ...]
    speed: float
    radius: float
    class_id: int
    height: float = 1.7
    spawn_t: float = 0.0
    progress: float = 0.0       # distance travelled along the route, m

    def _cumulative(self) -> list[float]:
        cum = [0.0]
        for (x0, y0), (x1, y1) in zip(self.route, self.route[1:]):
            cum.append(cum[-1] + math.hypot(x1 - x0, y1 - y0))
        return cum

    @property
    def position(self) -> tuple[float, float]:
        cum = self._cumulative()
        d = min(self.progress, cum[-1])
        for i in range(len(cum) - 1):
            if d <= cum[i + 1] or i == len(cum) - 2:
                seg = cum[i + 1] - cum[i]
                t = 0.0 if seg <= 0 else (d - cum[i]) / seg
                (x0, y0), (x1, y1) = self.route[i], self.route[i + 1]
                return (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
        return self.route[0]

    @property
    def velocity(self) -> tuple[float, float]:
        cum = self._cumulative()
        if self.progress >= cum[-1]:
            return (0.0, 0.0)
        for i in range(len(cum) - 1):
            if self.progress < cum[i + 1]:
                (x0, y0), (x1, y1) = self.route[i], self.route[i + 1]
                seg = math.hypot(x1 - x0, y1 - y0)
                if seg <= 0:
                    return (0.0, 0.0)
                return (self.speed * (x1 - x0) / seg, self.speed * (y1 - y0) / seg)
        return (0.0, 0.0)

    def active(self, t: float) -> bool:
        return t >= self.spawn_t


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    theta: float                 # rad, normalized to (-pi, pi]
    forward_speed: float = 0.0   # m/s, >= 0
    lateral_speed: float = 0.0   # m/s, + is rightward
    curvature: float = 0.0       # 1/m, + curves right

    @property
    def pose(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.theta)


@dataclass(frozen=True)
class HandlerAttachment:
    side: str = "left"
    lateral_offset: float = 0.55
    longitudinal_offset: float = -0.30
    footprint_radius: float = 0.25

    @classmethod
    def from_config(cls, cfg: HandlerConfig) -> "HandlerAttachment":
        return cls(cfg.side, cfg.lateral_offset, cfg.longitudinal_offset,
                   cfg.footprint_radius)


@dataclass(frozen=True)
class VelocityCommand:
    forward: float = 0.0
    lateral: float = 0.0         # + is rightward
    curvature: float = 0.0
    estop_active: bool = False
    sidestep_active: bool = False


@dataclass(frozen=True)
class CollisionReport:
    robot_hit: bool
    handler_hit: bool
    contact_entity: str | None
    min_clearance: float


@dataclass(frozen=True)
class WorldModel:
    floor: PolygonShape
    bounds: tuple[float, float, float, float]    # xmin, ymin, xmax, ymax
    obstacles: tuple[Obstacle, ...]
    pedestrians: tuple[PedestrianAgent, ...]
    robot_start: tuple[float, float, float]
    goal: PolygonShape | None = None
    route_length_m: float = 0.0
    name: str = ""
    t: float = 0.0


# ---------------------------------------------------------------------------
# scenario loading

def _parse_point(value, where: str) -> tuple[float, float]:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value)):
        raise ScenarioError(f"{where}: expected [x, y], got {value!r}")
    return (float(value[0]), float(value[1]))


def _parse_polygon(value, where: str) -> PolygonShape:
    if not isinstance(value, list) or len(value) < 3:
        raise ScenarioError(f"{where}: polygon needs >= 3 vertices")
    verts = [_parse_point(v, f"{where}[{i}]") for i, v in enumerate(value)]
    poly = Polygon(verts)
    if not poly.is_valid or not poly.is_simple:
        raise ScenarioError(f"{where}: polygon is self-intersecting")
    if poly.exterior.is_ccw is False:
        verts = verts[::-1]
    return PolygonShape(tuple(verts))


def _require_convex(shape: PolygonShape, where: str) -> None:
    pts = shape.as_array()
    n = len(pts)
    sign = 0.0
    for i in range(n):
        a, b, c = pts[i], pts[(i + 1) % n], pts[(i + 2) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if abs(cross) < 1e-12:
            continue
        if sign == 0.0:
            sign = math.copysign(1.0, cross)
        elif math.copysign(1.0, cross) != sign:
            raise ScenarioError(f"{where}: obstacle polygons must be convex")


def _rect_vertices(cx: float, cy: float, length: float, width: float,
                   yaw: float) -> tuple[tuple[float, float], ...]:
    c, s = math.cos(yaw), math.sin(yaw)
    hl, hw = length / 2.0, width / 2.0
    corners = [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)]
    return tuple((cx + c * px - s * py, cy + s * px + c * py) for px, py in corners)


MIN_OBSTACLE_HEIGHT = 0.5   # renderer assumes entities are taller than any camera


def _parse_shape(value, where: str) -> CircleShape | PolygonShape:
    if not isinstance(value, dict) or "type" not in value:
        raise ScenarioError(f"{where}: shape must be an object with a 'type'")
    kind = value["type"]
    if kind == "circle":
        cx, cy = _parse_point(value.get("center"), f"{where}.center")
        radius = float(value.get("radius", 0.0))
        if radius <= 0:
            raise ScenarioError(f"{where}: circle radius must be > 0")
        return CircleShape(cx, cy, radius)
    if kind == "polygon":
        shape = _parse_polygon(value.get("vertices"), f"{where}.vertices")
        _require_convex(shape, where)
        return shape
    if kind == "rect":
        cx, cy = _parse_point(value.get("center"), f"{where}.center")
        size = value.get("size")
        if not isinstance(size, (list, tuple)) or len(size) != 2:
            raise ScenarioError(f"{where}.size: expected [length, width]")
        yaw = math.radians(float(value.get("yaw_deg", 0.0)))
        return PolygonShape(_rect_vertices(cx, cy, float(size[0]), float(size[1]), yaw))
    raise ScenarioError(f"{where}: unknown shape type '{kind}'")


def _shape_bounds(shape: CircleShape | PolygonShape) -> tuple[float, float, float, float]:
    if isinstance(shape, CircleShape):
        return (shape.cx - shape.radius, shape.cy - shape.radius,
                shape.cx + shape.radius, shape.cy + shape.radius)
    arr = shape.as_array()
    return (arr[:, 0].min(), arr[:, 1].min(), arr[:, 0].max(), arr[:, 1].max())


def _within(inner: tuple[float, float, float, float],
            outer: tuple[float, float, float, float], tol: float = 1e-9) -> bool:
    return (inner[0] >= outer[0] - tol and inner[1] >= outer[1] - tol
            and inner[2] <= outer[2] + tol and inner[3] <= outer[3] + tol)


def load_world(source: str | Path | dict, speed_cap: float = 2.0) -> WorldModel:
    """Load and validate a scenario into its t=0 world state.

    `source` is a JSON file path or an already-parsed dict (same schema).
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(
                f"{source}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from None
    else:
        data = source
    if not isinstance(data, dict):
        raise ScenarioError("scenario: top level must be an object")

    if "floor" not in data:
        raise ScenarioError("scenario: missing required field 'floor'")
    floor = _parse_polygon(data["floor"], "floor")
    fb = _shape_bounds(floor)
    bounds = tuple(float(v) for v in data.get("bounds", fb))
    if len(bounds) != 4 or bounds[2] <= bounds[0] or bounds[3] <= bounds[1]:
        raise ScenarioError("bounds: expected [xmin, ymin, xmax, ymax] with area")
    if not _within(fb, bounds):
        raise ScenarioError("floor: polygon extends outside bounds")

    obstacles = []
    for i, entry in enumerate(data.get("obstacles", [])):
        where = f"obstacles[{i}]"
        if not isinstance(entry, dict):
            raise ScenarioError(f"{where}: expected an object")
        shape = _parse_shape(entry.get("shape"), f"{where}.shape")
        class_id = int(entry.get("class_id", -1))
        if not 0 <= class_id < 150:
            raise ScenarioError(f"{where}: class_id {class_id} outside [0, 150)")
        height = float(entry.get("height", 1.0))
        if height < MIN_OBSTACLE_HEIGHT:
            raise ScenarioError(
                f"{where}: height {height} below minimum {MIN_OBSTACLE_HEIGHT}")
        if not _within(_shape_bounds(shape), bounds):
            raise ScenarioError(f"{where}: shape extends outside bounds")
        obstacles.append(Obstacle(str(entry.get("id", f"obs{i}")), class_id, height, shape))

    pedestrians = []
    for i, entry in enumerate(data.get("pedestrians", [])):
        where = f"pedestrians[{i}]"
        if not isinstance(entry, dict):
            raise ScenarioError(f"{where}: expected an object")
        route_raw = entry.get("route")
        if not isinstance(route_raw, list) or len(route_raw) < 1:
            raise ScenarioError(f"{where}: route needs >= 1 waypoint")
        route = tuple(_parse_point(p, f"{where}.route[{j}]") for j, p in enumerate(route_raw))
        if len(route) == 1:
            route = (route[0], route[0])
        speed = float(entry.get("speed", 0.0))
        if speed < 0 or speed > speed_cap:
            raise ScenarioError(f"{where}: speed {speed} outside [0, {speed_cap}]")
        radius = float(entry.get("radius", 0.0))
        if radius <= 0:
            raise ScenarioError(f"{where}: radius must be > 0")
        for j, (px, py) in enumerate(route):
            if not _within((px - radius, py - radius, px + radius, py + radius), bounds):
                raise ScenarioError(f"{where}.route[{j}]: footprint leaves bounds")
        pedestrians.append(PedestrianAgent(
            agent_id=str(entry.get("id", f"ped{i}")),
            route=route,
            speed=speed,
            radius=radius,
            class_id=int(entry.get("class_id", 12)),
            height=float(entry.get("height", 1.7)),
            spawn_t=float(entry.get("spawn_t", 0.0)),
        ))

    if "robot_start" not in data:
        raise ScenarioError("scenario: missing required field 'robot_start'")
    rs = data["robot_start"]
    if not isinstance(rs, (list, tuple)) or len(rs) != 3:
        raise ScenarioError("robot_start: expected [x, y, theta]")
    robot_start = (float(rs[0]), float(rs[1]), normalize_angle(float(rs[2])))
    if not Polygon(floor.vertices).contains(Point(robot_start[:2])):
        raise ScenarioError("robot_start: must lie inside the floor polygon")

    goal = _parse_polygon(data["goal_region"], "goal_region") if "goal_region" in data else None
    if goal is not None and not _within(_shape_bounds(goal), bounds):
        raise ScenarioError("goal_region: extends outside bounds")

    return WorldModel(
        floor=floor,
        bounds=bounds,  # type: ignore[arg-type]
        obstacles=tuple(obstacles),
        pedestrians=tuple(pedestrians),
        robot_start=robot_start,
        goal=goal,
        route_length_m=float(data.get("route_length_m", 0.0)),
        name=str(data.get("name", "")),
    )


# ---------------------------------------------------------------------------
# stepping

def step_world(world: WorldModel, dt: float) -> WorldModel:
    """Advance pedestrians along their scripted routes by dt seconds."""
    if not 0.0 < dt <= 0.1:
        raise ValueError(f"dt must be in (0, 0.1], got {dt}")
    t_next = world.t + dt
    if not world.pedestrians:
        return replace(world, t=t_next)
    peds = []
    for ped in world.pedestrians:
        if t_next <= ped.spawn_t:
            peds.append(ped)
        else:
            step = min(dt, t_next - ped.spawn_t)
            peds.append(replace(ped, progress=ped.progress + ped.speed * step))
    return replace(world, pedestrians=tuple(peds), t=t_next)


def clamp_command(cmd: VelocityCommand, robot: RobotConfig) -> tuple[VelocityCommand, bool]:
    """Clamp a command to actuator limits; reports whether anything changed."""
    forward = min(max(cmd.forward, 0.0), robot.v_limit)
    lateral = min(max(cmd.lateral, -robot.lateral_limit), robot.lateral_limit)
    curvature = min(max(cmd.curvature, -robot.kappa_limit), robot.kappa_limit)
    clamped = (forward, lateral, curvature) != (cmd.forward, cmd.lateral, cmd.curvature)
    if not clamped:
        return cmd, False
    return replace(cmd, forward=forward, lateral=lateral, curvature=curvature), True


def step_robot(state: RobotState, cmd: VelocityCommand, dt: float,
               robot: RobotConfig = RobotConfig()) -> RobotState:
    """Integrate the unicycle exactly along a constant-curvature arc.

    Positive curvature turns right (heading decreases); lateral speed
    translates the body sideways (+ right) without changing heading.
    """
    if not 0.0 < dt <= 0.1:
        raise ValueError(f"dt must be in (0, 0.1], got {dt}")
    cmd, _ = clamp_command(cmd, robot)
    v, kappa = cmd.forward, cmd.curvature
    arc = v * dt
    if abs(kappa) > robot.kappa_epsilon and arc != 0.0:
        ang = kappa * arc
        dx = math.sin(ang) / kappa
        dy = -(1.0 - math.cos(ang)) / kappa
        dtheta = -ang
    else:
        dx, dy, dtheta = arc, 0.0, 0.0
    dy -= cmd.lateral * dt
    c, s = math.cos(state.theta), math.sin(state.theta)
    return RobotState(
        x=state.x + c * dx - s * dy,
        y=state.y + s * dx + c * dy,
        theta=normalize_angle(state.theta + dtheta),
        forward_speed=v,
        lateral_speed=cmd.lateral,
        curvature=kappa,
    )


def handler_pose(state: RobotState, attach: HandlerAttachment) -> tuple[float, float]:
    """World position of the handler under the rigid harness attachment."""
    lateral = attach.lateral_offset if attach.side == "left" else -attach.lateral_offset
    c, s = math.cos(state.theta), math.sin(state.theta)
    lx, ly = attach.longitudinal_offset, lateral
    return (state.x + c * lx - s * ly, state.y + s * lx + c * ly)


# ---------------------------------------------------------------------------
# collision checking

def robot_footprint(state: RobotState, robot: RobotConfig) -> Polygon:
    return Polygon(_rect_vertices(state.x, state.y, robot.body_length,
                                  robot.body_width, state.theta))


class CollisionChecker:
    """Caches static shapely geometry so per-tick checks stay cheap."""

    def __init__(self, world: WorldModel, robot: RobotConfig):
        self.robot = robot
        self.floor = Polygon(world.floor.vertices)
        self.boundary = self.floor.boundary
        self.static = []
        for obs in world.obstacles:
            if isinstance(obs.shape, CircleShape):
                geom = Point(obs.shape.cx, obs.shape.cy)
                self.static.append((obs.obstacle_id, geom, obs.shape.radius))
            else:
                self.static.append((obs.obstacle_id, Polygon(obs.shape.vertices), 0.0))

    def check(self, world: WorldModel, state: RobotState,
              attach: HandlerAttachment) -> CollisionReport:
        body = robot_footprint(state, self.robot)
        hx, hy = handler_pose(state, attach)
        hand = Point(hx, hy)
        hr = attach.footprint_radius

        entities = list(self.static)
        for ped in world.pedestrians:
            if ped.active(world.t):
                px, py = ped.position
                entities.append((ped.agent_id, Point(px, py), ped.radius))

        robot_hit = handler_hit = False
        contact = None
        clearance = math.inf
        for name, geom, pad in entities:
            d_robot = body.distance(geom) - pad
            d_hand = hand.distance(geom) - pad - hr
            if d_robot <= 0.0 and not robot_hit:
                robot_hit, contact = True, contact or name
            if d_hand <= 0.0 and not handler_hit:
                handler_hit, contact = True, contact or name
            clearance = min(clearance, d_robot, d_hand)

        # the floor boundary acts as a wall: anything poking outside has hit it
        if self.floor.contains(body):
            clearance = min(clearance, body.distance(self.boundary))
        else:
            robot_hit, contact = True, contact or "wall"
            clearance = 0.0
        d_hand_wall = hand.distance(self.boundary) - hr
        if self.floor.contains(hand) and d_hand_wall > 0.0:
            clearance = min(clearance, d_hand_wall)
        else:
            handler_hit, contact = True, contact or "wall"
            clearance = 0.0

        if robot_hit or handler_hit:
            clearance = 0.0
        return CollisionReport(robot_hit, handler_hit, contact, max(clearance, 0.0))


def check_collision(world: WorldModel, state: RobotState, attach: HandlerAttachment,
                    robot: RobotConfig = RobotConfig()) -> CollisionReport:
    """Exact intersection/clearance test for the robot rectangle + handler disc."""
    return CollisionChecker(world, robot).check(world, state, attach)

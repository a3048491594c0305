"""Closed-loop episode runner: world stepping, perception, planning, safety
arbitration, logging, metrics and replay.

The loop runs on integer sim ticks (100 Hz).  Planning fires every 5th tick
(20 Hz); perception frame n fires at the first tick whose time reaches
n/30 s, which is drift-free over any horizon.  Everything is seeded and the
log serialization is canonical, so identical inputs give byte-identical
logs.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from shapely.geometry import Point, Polygon

from .config import AppConfig, timeout_for_route
from .handle import ButtonDecoder, ButtonEvent
from .perception import (
    BevProjector,
    CameraModel,
    FrameDumper,
    NoiseSpec,
    binarize,
    despeckle_binary,
    to_cost_image,
)
from .planner import BiasTracker, RolloutEvaluator, generate_rollouts, inflate_costmap
from .render import SceneRenderer
from .safety import SpeedState, arbitrate, box_occupancy, update_speed
from .scenarios import resolve_scenario
from .world import (
    CollisionChecker,
    HandlerAttachment,
    RobotState,
    clamp_command,
    handler_pose,
    load_world,
    step_robot,
    step_world,
)

LOG_FORMAT = "guidenav-log-v1"
PROTO_VERSION = 1


class LogFormatError(RuntimeError):
    """Episode log incompatible with this build."""


@dataclass
class EpisodeLog:
    header: dict
    ticks: list[dict] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    end: dict | None = None

    def to_jsonl(self) -> str:
        records = [self.header, *self._interleaved(), self.end]
        return "\n".join(
            json.dumps(r, sort_keys=True, separators=(",", ":")) for r in records
        ) + "\n"

    def _interleaved(self):
        merged = [(r["t"], 0, r) for r in self.ticks] + \
                 [(r["t"], 1, r) for r in self.events]
        return [r for _, _, r in sorted(merged, key=lambda x: (x[0], x[1]))]

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str) -> "EpisodeLog":
        lines = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not lines or lines[0].get("type") != "header":
            raise LogFormatError("missing header record")
        if lines[0].get("format") != LOG_FORMAT:
            raise LogFormatError(
                f"log format {lines[0].get('format')!r} incompatible with {LOG_FORMAT}")
        log = cls(header=lines[0])
        for rec in lines[1:]:
            kind = rec.get("type")
            if kind == "tick":
                log.ticks.append(rec)
            elif kind == "event":
                log.events.append(rec)
            elif kind == "end":
                log.end = rec
        if log.end is None:
            raise LogFormatError("truncated log: missing end record")
        return log

    @classmethod
    def load(cls, path: str | Path) -> "EpisodeLog":
        return cls.from_jsonl(Path(path).read_text())


def _rle_encode(grid: np.ndarray, unknown: np.ndarray) -> list[list[int]]:
    """Row-major run-length pairs; unknown cells use the 255 sentinel."""
    flat = np.where(unknown, 255, grid).astype(np.int64).ravel()
    change = np.nonzero(np.diff(flat))[0] + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change, [flat.size]])
    return [[int(flat[s]), int(e - s)] for s, e in zip(starts, ends)]


def rle_decode(pairs: list[list[int]], rows: int, cols: int) -> np.ndarray:
    out = np.concatenate([np.full(n, v, np.int64) for v, n in pairs])
    return out.reshape(rows, cols)


class EpisodeRunner:
    """One scenario bound to its renderers, planner and safety state."""

    def __init__(self, scenario, config: AppConfig | None = None, seed: int = 0):
        self.cfg = (config or AppConfig()).validate()
        self.scenario = resolve_scenario(scenario)
        self.seed = int(seed)
        self.world = load_world(self.scenario, self.cfg.sim.pedestrian_speed_cap)
        pipe = self.cfg.pipeline
        self.cameras = {
            "front": CameraModel(pipe.front_camera),
            "left": CameraModel(pipe.left_camera),
        }
        self.grids = {"front": pipe.front_grid, "left": pipe.left_grid}
        self.renderers = {
            name: SceneRenderer(cam, self.world, pipe)
            for name, cam in self.cameras.items()
        }
        self.projectors = {
            name: BevProjector(cam, self.grids[name])
            for name, cam in self.cameras.items()
        }
        self.groups = generate_rollouts(self.cfg.planner)
        self.evaluator = RolloutEvaluator(self.groups, self.cfg.planner)
        self.checker = CollisionChecker(self.world, self.cfg.robot)
        self.attach = HandlerAttachment.from_config(self.cfg.handler)
        self.goal = Polygon(self.world.goal.vertices) if self.world.goal else None
        self.trajectory_polylines = [
            [[round(float(x), 3), round(float(y), 3)] for x, y in
             g.center.samples[::4]]
            for g in self.groups
        ]

    def _noise_spec(self, frame_index: int, cam_index: int) -> NoiseSpec | None:
        noise = self.cfg.pipeline.noise
        if noise.pixel_flip_rate == 0.0 and noise.blob_count == 0:
            return None
        seq = np.random.SeedSequence([self.seed, frame_index, cam_index])
        return NoiseSpec(noise.pixel_flip_rate, noise.blob_count,
                         noise.blob_radius, int(seq.generate_state(1)[0]))


def run_episode(scenario, config: AppConfig | None = None, presses=None,
                seed: int = 0, *, bridge=None, realtime: bool = False,
                dump_frames: str | Path | None = None,
                max_sim_time: float | None = None) -> EpisodeLog:
    """Run the fixed-step loop until goal, collision, timeout or abort.

    `presses` is a scripted command source: an iterable of {"t": s,
    "button": "up"|"down"} entries.  With a `bridge`, live presses are
    accepted and snapshots published at the planning rate; `realtime` paces
    the loop to the wall clock (interactive mode only).
    """
    runner = EpisodeRunner(scenario, config, seed)
    cfg = runner.cfg
    world = runner.world
    dt = cfg.sim.dt
    ticks_per_s = int(round(1.0 / dt))
    plan_every = ticks_per_s // cfg.sim.planning_hz
    fps = cfg.sim.perception_hz

    script = sorted(
        [(float(p["t"]), str(p["button"])) for p in (presses or [])],
        key=lambda p: p[0])
    script_pos = 0

    limit = timeout_for_route(world.route_length_m or 20.0, cfg.sim)
    if max_sim_time is not None:
        limit = min(limit, max_sim_time)
    max_ticks = int(math.ceil(limit / dt))

    decoder = ButtonDecoder(cfg.sim.double_press_window)
    bias_tracker = BiasTracker(cfg.planner)
    speed = SpeedState.from_config(cfg.speed)
    state = RobotState(*world.robot_start)
    dumper = FrameDumper(dump_frames) if dump_frames else None

    # normalize through JSON so the in-memory log equals its serialized form
    log = EpisodeLog(header=json.loads(json.dumps({
        "type": "header",
        "format": LOG_FORMAT,
        "scenario": runner.scenario,
        "config": cfg.to_dict(),
        "seed": runner.seed,
        "script": [{"t": t, "button": b} for t, b in script],
    }, sort_keys=True)))

    maps = {}
    current_cmd = None
    frame_index = 0
    next_frame_tick = 0
    sidestepping = False
    end_reason = "timeout"
    end_t = max_ticks * dt
    wall_start = time.perf_counter()

    for k in range(max_ticks + 1):
        t = k * dt
        if realtime:
            lag = wall_start + t - time.perf_counter()
            if lag > 0:
                time.sleep(lag)

        while script_pos < len(script) and script[script_pos][0] <= t:
            press_t, button = script[script_pos]
            decoder.record_press(ButtonEvent(button, press_t))
            script_pos += 1
        if bridge is not None:
            for button in bridge.poll_presses():
                decoder.record_press(ButtonEvent(button, t))
                log.events.append({"type": "event", "t": t, "kind": "press",
                                   "button": button})

        if k == next_frame_tick:
            for ci, (name, renderer) in enumerate(runner.renderers.items()):
                frame = renderer.render(world, state, timestamp=t)
                spec = runner._noise_spec(frame_index, ci)
                if spec is not None:
                    from .perception import inject_noise
                    frame = inject_noise(frame, spec)
                binary = binarize(frame, set(cfg.pipeline.traversable_classes))
                projector = runner.projectors[name]
                if cfg.pipeline.despeckle:
                    maps[name] = projector.project_binary_majority(binary)
                else:
                    maps[name] = projector.project(to_cost_image(binary))
                if dumper is not None:
                    gray = to_cost_image(despeckle_binary(binary)
                                         if cfg.pipeline.despeckle else binary)
                    dumper.add(k, frame, gray)
            frame_index += 1
            next_frame_tick = -(-frame_index * ticks_per_s // fps)  # ceil

        if k % plan_every == 0:
            for cmd in decoder.decode_all(t):
                log.events.append({"type": "event", "t": t, "kind": "command",
                                   "command": cmd.kind})
                if cmd.kind in ("TurnLeft", "TurnRight"):
                    bias_tracker.command(cmd, t, state.theta)
                else:
                    speed = update_speed(speed, cmd)
            bias = bias_tracker.current(t, state.theta)
            planner_map = inflate_costmap(
                maps["front"], cfg.planner.hard_inflate_cells,
                cfg.planner.soft_inflate_cells, cfg.planner.soft_inflate_cost)
            plan = runner.evaluator.evaluate(planner_map, bias)
            occ_front = box_occupancy(maps["front"], cfg.safety.front_box)
            occ_left = box_occupancy(maps["left"], cfg.safety.left_box)
            estop = occ_front >= cfg.safety.front_box.threshold
            # hysteresis: an engaged side-step releases only once the box is
            # nearly empty, giving the trailing handler real clearance
            left_threshold = cfg.safety.left_release_threshold if sidestepping \
                else cfg.safety.left_box.threshold
            left_ok = occ_left < left_threshold
            raw = arbitrate(plan, estop, left_ok, speed, cfg.safety.sidestep_speed)
            sidestepping = raw.sidestep_active
            cmd_vel, clamped = clamp_command(raw, cfg.robot)
            if clamped:
                log.events.append({"type": "event", "t": t, "kind": "clamp"})
            current_cmd = cmd_vel

            report = runner.checker.check(world, state, runner.attach)
            hx, hy = handler_pose(state, runner.attach)
            log.ticks.append({
                "type": "tick", "k": k, "t": t,
                "pose": [state.x, state.y, state.theta],
                "handler": [hx, hy],
                "cmd": {"forward": cmd_vel.forward, "lateral": cmd_vel.lateral,
                        "curvature": cmd_vel.curvature,
                        "estop": cmd_vel.estop_active,
                        "sidestep": cmd_vel.sidestep_active},
                "plan": {"kappa": plan.chosen_curvature,
                         "total": plan.chosen_cost.total,
                         "free": plan.chosen_cost.free_length,
                         "blocked": plan.blocked, "index": plan.chosen_index},
                "occ_front": occ_front, "occ_left": occ_left,
                "bias": {"direction": bias.direction, "magnitude": bias.magnitude,
                         "expires_at": bias.expires_at},
                "speed": speed.commanded_speed,
                "clearance": report.min_clearance,
                "collision": report.robot_hit or report.handler_hit,
            })
            if bridge is not None:
                bridge.publish(build_snapshot(runner, log.ticks[-1], maps, plan))
            if report.robot_hit or report.handler_hit:
                log.events.append({
                    "type": "event", "t": t, "kind": "collision",
                    "entity": report.contact_entity,
                    "robot_hit": report.robot_hit,
                    "handler_hit": report.handler_hit,
                })
                end_reason, end_t = "collision", t
                break
            if runner.goal is not None and runner.goal.contains(Point(state.x, state.y)):
                end_reason, end_t = "goal", t
                break
            if bridge is not None and bridge.abort_requested:
                end_reason, end_t = "abort", t
                break

        if k == max_ticks:
            end_reason, end_t = "timeout", t
            break
        state = step_robot(state, current_cmd, dt, cfg.robot)
        world = step_world(world, dt)

    if dumper is not None:
        dumper.close()
    log.end = {"type": "end", "t": end_t, "reason": end_reason,
               "ticks": len(log.ticks),
               "completed": end_reason == "goal"
               and not any(e["kind"] == "collision" for e in log.events)}
    return log


def build_snapshot(runner: EpisodeRunner, tick: dict, maps, plan) -> dict:
    """Self-contained UI state message (wire protocol, proto 1)."""
    boxes = []
    for box, occ_key in ((runner.cfg.safety.front_box, "occ_front"),
                         (runner.cfg.safety.left_box, "occ_left")):
        boxes.append({
            "source": box.map_source,
            "region": [box.x_min, box.x_max, box.y_min, box.y_max],
            "occupancy": tick[occ_key],
            "threshold": box.threshold,
        })
    grids = {}
    for name, bev in maps.items():
        grids[name] = {
            "rows": bev.rows, "cols": bev.cols, "resolution": bev.resolution,
            "x_min": bev.x_min, "y_min": bev.y_min,
            "rle": _rle_encode(bev.grid, bev.unknown),
        }
    return {
        "type": "snapshot",
        "proto": PROTO_VERSION,
        "t": tick["t"],
        "pose": tick["pose"],
        "handler": tick["handler"],
        "speed": tick["speed"],
        "flags": {"estop": tick["cmd"]["estop"], "sidestep": tick["cmd"]["sidestep"]},
        "bias": tick["bias"],
        "plan": tick["plan"],
        "boxes": boxes,
        "maps": grids,
        "trajectories": runner.trajectory_polylines,
        "chosen_index": plan.chosen_index,
        "robot": {"length": runner.cfg.robot.body_length,
                  "width": runner.cfg.robot.body_width,
                  "handler_radius": runner.attach.footprint_radius},
    }


# ---------------------------------------------------------------------------
# metrics

@dataclass(frozen=True)
class Metrics:
    completed: bool
    distance_traveled: float
    elapsed: float
    mean_speed: float
    collisions: int
    min_clearance: float
    estop_count: int
    sidestep_time: float
    planning_period_p99: float      # ms of simulated time between plans

    def to_dict(self) -> dict:
        return {
            "completed": self.completed,
            "distance_traveled": self.distance_traveled,
            "elapsed": self.elapsed,
            "mean_speed": self.mean_speed,
            "collisions": self.collisions,
            "min_clearance": self.min_clearance,
            "estop_count": self.estop_count,
            "sidestep_time": self.sidestep_time,
            "planning_period_p99": self.planning_period_p99,
        }

    def to_csv(self) -> str:
        d = self.to_dict()
        head = ",".join(d)
        row = ",".join(str(v) for v in d.values())
        return f"{head}\n{row}\n"


def compute_metrics(log: EpisodeLog) -> Metrics:
    """Derive episode metrics purely from the log records."""
    if log.end is None or not log.ticks:
        raise LogFormatError("cannot compute metrics for a truncated log")
    poses = np.array([rec["pose"][:2] for rec in log.ticks])
    distance = float(np.hypot(*np.diff(poses, axis=0).T).sum()) if len(poses) > 1 else 0.0
    elapsed = float(log.end["t"])
    collisions = sum(1 for e in log.events if e["kind"] == "collision")
    estops = 0
    prev = False
    sidestep_ticks = 0
    for rec in log.ticks:
        active = rec["cmd"]["estop"]
        if active and not prev:
            estops += 1
        prev = active
        sidestep_ticks += int(rec["cmd"]["sidestep"])
    times = np.array([rec["t"] for rec in log.ticks])
    period_p99 = float(np.percentile(np.diff(times), 99) * 1e3) if len(times) > 1 else 0.0
    plan_period = float(np.median(np.diff(times))) if len(times) > 1 else 0.05
    return Metrics(
        completed=bool(log.end["reason"] == "goal" and collisions == 0),
        distance_traveled=distance,
        elapsed=elapsed,
        mean_speed=distance / elapsed if elapsed > 0 else 0.0,
        collisions=collisions,
        min_clearance=min(rec["clearance"] for rec in log.ticks),
        estop_count=estops,
        sidestep_time=sidestep_ticks * plan_period,
        planning_period_p99=period_p99,
    )


def replay(log: EpisodeLog, rate: float | None = None):
    """Yield per-tick snapshots; `rate` > 0 paces them against the wall clock
    at that multiple of real time (None = as fast as possible)."""
    if log.header.get("format") != LOG_FORMAT:
        raise LogFormatError("log format incompatible with this build")
    start_wall = time.perf_counter()
    t0 = log.ticks[0]["t"] if log.ticks else 0.0
    for rec in log.ticks:
        if rate:
            target = start_wall + (rec["t"] - t0) / rate
            lag = target - time.perf_counter()
            if lag > 0:
                time.sleep(lag)
        yield rec

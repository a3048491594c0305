"""Configuration dataclasses and JSON loading for the whole stack.

Every tunable lives here with its default.  A config file (JSON) may override
any subset of fields section by section; unknown keys are rejected so typos
fail loudly instead of silently running with defaults.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Invalid configuration value or malformed config file."""


@dataclass(frozen=True)
class CameraConfig:
    """Pinhole camera rigidly mounted on the robot body."""

    mount: str = "front"          # "front" | "left"
    x: float = 0.25               # position in robot frame, m
    y: float = 0.0
    height: float = 0.40          # above ground, m
    yaw_deg: float = 0.0          # about robot z; +90 faces the robot's left
    pitch_deg: float = 20.0       # downward tilt
    fx: float = 230.0             # wide ~90 deg horizontal FOV at 464 px
    fy: float = 320.0
    cx: float = 231.5             # half-integer center keeps left/right mirror exact
    cy: float = 199.5
    width: int = 464
    height_px: int = 400
    fps: int = 30

    def validate(self) -> None:
        if (self.width, self.height_px) != (464, 400):
            raise ConfigError(f"camera '{self.mount}': image size must be 464x400")
        if self.height <= 0:
            raise ConfigError(f"camera '{self.mount}': height must be > 0")
        if self.mount == "front" and abs(self.yaw_deg) > 5.0:
            raise ConfigError("front camera yaw must stay within 5 deg of heading")
        if self.mount not in ("front", "left"):
            raise ConfigError(f"unknown camera mount '{self.mount}'")


@dataclass(frozen=True)
class BevGridConfig:
    """Metric extent and resolution of a bird's-eye cost grid (robot frame)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    resolution: float = 0.05

    def validate(self) -> None:
        if self.resolution <= 0:
            raise ConfigError("BEV resolution must be > 0")
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ConfigError("BEV extent must have positive area")

    @property
    def rows(self) -> int:
        return int(round((self.x_max - self.x_min) / self.resolution))

    @property
    def cols(self) -> int:
        return int(round((self.y_max - self.y_min) / self.resolution))


@dataclass(frozen=True)
class NoiseConfig:
    """Label corruption injected after rendering (off by default)."""

    pixel_flip_rate: float = 0.0
    blob_count: int = 0
    blob_radius: int = 6

    def validate(self) -> None:
        if not 0.0 <= self.pixel_flip_rate <= 1.0:
            raise ConfigError("pixel_flip_rate must be in [0, 1]")
        if self.blob_count < 0:
            raise ConfigError("blob_count must be >= 0")


@dataclass(frozen=True)
class PipelineConfig:
    """Semantic rendering and BEV projection settings."""

    floor_class: int = 3
    wall_class: int = 0
    person_class: int = 12
    traversable_classes: tuple[int, ...] = (3,)
    despeckle: bool = True              # 3x3 majority vote on the binary image
    max_render_distance: float = 8.0    # ground beyond this renders as wall
    wall_height: float = 2.4            # extrusion height of floor boundary
    person_height: float = 1.7
    azimuth_bins: int = 2048
    front_camera: CameraConfig = field(default_factory=CameraConfig)
    # forward-biased left mount covers the handler corridor ahead-left
    left_camera: CameraConfig = field(
        default_factory=lambda: CameraConfig(
            mount="left", x=0.0, y=0.15, height=0.45, yaw_deg=50.0, pitch_deg=40.0,
            fx=260.0, fy=260.0,
        )
    )
    front_grid: BevGridConfig = field(
        default_factory=lambda: BevGridConfig(x_min=0.0, x_max=4.0, y_min=-1.5, y_max=1.5)
    )
    left_grid: BevGridConfig = field(
        default_factory=lambda: BevGridConfig(x_min=-1.0, x_max=1.0, y_min=0.2, y_max=2.2)
    )
    noise: NoiseConfig = field(default_factory=NoiseConfig)

    def validate(self) -> None:
        for cid in (self.floor_class, self.wall_class, self.person_class):
            if not 0 <= cid < 150:
                raise ConfigError(f"class id {cid} outside [0, 150)")
        if not self.traversable_classes:
            raise ConfigError("traversable_classes must be non-empty")
        self.front_camera.validate()
        self.left_camera.validate()
        self.front_grid.validate()
        self.left_grid.validate()
        self.noise.validate()


@dataclass(frozen=True)
class PlannerConfig:
    """Curvature roll-out evaluation parameters."""

    kappa_min: float = -1.5             # 1/m; negative curves left
    kappa_max: float = 1.5              # positive curves right
    n_trajectories: int = 40
    max_arc_length: float = 4.0         # m
    sample_spacing: float = 0.1         # m along each arc
    # evaluation starts past the front camera's near blind zone (the ground
    # right at the robot's feet is invisible from a body-mounted camera);
    # the e-stop cost box owns that gap
    sample_start: float = 1.0
    # Lateral offsets of the evaluated lines (+ is the robot's left): right body
    # edge, midline of the merged body+handler corridor, handler outer edge.
    line_offsets: tuple[float, ...] = (-0.20, 0.325, 0.85)
    w_visual: float = 1.0               # per cost-unit per sample
    w_length: float = 150.0             # per meter of lost free length
    block_threshold: int = 100
    # blocked cells are dilated in the planner's view of the map: a hard ring
    # keeps the greedy re-planner off zero-clearance grazes between the
    # sampled member lines, and a soft (sub-threshold) ring charges visual
    # cost for skimming so free-length ties break toward wider margins
    hard_inflate_cells: int = 1
    soft_inflate_cells: int = 1
    soft_inflate_cost: int = 8
    # one full sample past sample_start: a path blocked at its very first
    # evaluated sample is never chosen
    min_free_length: float = 1.2
    bias_magnitude: float = 120.0       # cost units
    bias_max_magnitude: float = 200.0
    bias_duration: float = 6.0          # s
    bias_heading_cancel_deg: float = 60.0

    def validate(self) -> None:
        if self.n_trajectories < 2:
            raise ConfigError("n_trajectories must be >= 2")
        if self.kappa_min >= self.kappa_max:
            raise ConfigError("kappa_min must be < kappa_max")
        if self.sample_spacing <= 0 or self.max_arc_length <= 0:
            raise ConfigError("arc sampling parameters must be positive")
        if not 0.0 <= self.sample_start < self.max_arc_length:
            raise ConfigError("sample_start must be in [0, max_arc_length)")
        ratio = self.sample_start / self.sample_spacing
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError("sample_start must be a multiple of sample_spacing")
        if self.bias_magnitude < 0 or self.bias_magnitude > self.bias_max_magnitude:
            raise ConfigError("bias_magnitude must be in [0, bias_max_magnitude]")


@dataclass(frozen=True)
class CostBoxConfig:
    """Axis-aligned rectangle in robot-frame BEV coordinates plus trigger threshold."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    threshold: float = 0.15     # occupancy fraction
    map_source: str = "front"

    def validate(self) -> None:
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ConfigError("cost box must have positive area")
        if not 0.0 < self.threshold <= 1.0:
            raise ConfigError("cost box threshold must be in (0, 1]")
        if self.map_source not in ("front", "left"):
            raise ConfigError(f"unknown cost box map source '{self.map_source}'")


@dataclass(frozen=True)
class SafetyConfig:
    # the front box reaches the planner's first arc sample; the left box
    # covers the handler corridor over the same near range
    front_box: CostBoxConfig = field(
        default_factory=lambda: CostBoxConfig(
            x_min=0.325, x_max=1.0, y_min=-0.25, y_max=0.25, map_source="front"
        )
    )
    # guards the handler's own lane plus a pre-contact margin; short depth so
    # it backs up the planner for near pinches rather than pre-empting it,
    # and a hallway wall at normal lane offsets stays below threshold
    left_box: CostBoxConfig = field(
        default_factory=lambda: CostBoxConfig(
            x_min=0.0, x_max=0.8, y_min=0.30, y_max=0.95, threshold=0.10,
            map_source="left"
        )
    )
    # once side-stepping, keep stepping until the box is essentially empty so
    # the handler (trailing the box) regains real lateral clearance
    left_release_threshold: float = 0.02
    sidestep_speed: float = 0.15    # m/s rightward while clearing the left box

    def validate(self) -> None:
        self.front_box.validate()
        self.left_box.validate()
        if self.sidestep_speed <= 0:
            raise ConfigError("sidestep_speed must be > 0")
        if not 0.0 < self.left_release_threshold <= self.left_box.threshold:
            raise ConfigError(
                "left_release_threshold must be in (0, left_box.threshold]")


@dataclass(frozen=True)
class SpeedConfig:
    """Incremental speed protocol: double-press steps of 0.05 m/s on a lattice."""

    v_min: float = 0.30
    v_max: float = 1.20
    step: float = 0.05
    v_default: float = 0.70

    def validate(self) -> None:
        if not self.v_min <= self.v_default <= self.v_max:
            raise ConfigError("v_default must lie within [v_min, v_max]")
        if self.step <= 0:
            raise ConfigError("speed step must be > 0")
        k = (self.v_default - self.v_min) / self.step
        if abs(k - round(k)) > 1e-9:
            raise ConfigError("v_default must sit on the v_min + k*step lattice")


@dataclass(frozen=True)
class RobotConfig:
    body_length: float = 0.65
    body_width: float = 0.30
    v_limit: float = 1.3            # actuator forward speed cap, m/s
    lateral_limit: float = 0.3      # m/s
    kappa_limit: float = 1.5        # 1/m
    kappa_epsilon: float = 1e-6     # below this, arcs integrate as straight lines

    def validate(self) -> None:
        if self.body_length <= 0 or self.body_width <= 0:
            raise ConfigError("robot body dimensions must be positive")


@dataclass(frozen=True)
class HandlerConfig:
    side: str = "left"
    lateral_offset: float = 0.55        # m from robot centerline
    longitudinal_offset: float = -0.30  # m; negative = beside the hindquarters
    footprint_radius: float = 0.25
    clearance_margin: float = 0.10

    def validate(self, robot: RobotConfig) -> None:
        if self.side not in ("left", "right"):
            raise ConfigError("handler side must be 'left' or 'right'")
        if self.lateral_offset < robot.body_width / 2 + self.clearance_margin:
            raise ConfigError(
                "handler lateral_offset must be >= robot half-width + clearance margin"
            )
        if self.longitudinal_offset > 0:
            raise ConfigError("handler longitudinal_offset must be <= 0")
        if self.footprint_radius <= 0:
            raise ConfigError("handler footprint_radius must be > 0")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01                    # 100 Hz physics
    perception_hz: int = 30
    planning_hz: int = 20
    double_press_window: float = 0.4    # s
    timeout_factor: float = 3.0         # times nominal route duration
    nominal_speed: float = 0.7          # m/s, used only for the timeout bound
    pedestrian_speed_cap: float = 2.0

    def validate(self) -> None:
        if not 0 < self.dt <= 0.1:
            raise ConfigError("sim dt must be in (0, 0.1]")
        ratio = 1.0 / (self.planning_hz * self.dt)
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError("planning period must be an integer number of sim ticks")


@dataclass(frozen=True)
class AppConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    robot: RobotConfig = field(default_factory=RobotConfig)
    handler: HandlerConfig = field(default_factory=HandlerConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    safety: SafetyConfig = field(default_factory=SafetyConfig)
    speed: SpeedConfig = field(default_factory=SpeedConfig)

    def validate(self) -> "AppConfig":
        self.sim.validate()
        self.robot.validate()
        self.handler.validate(self.robot)
        self.pipeline.validate()
        self.planner.validate()
        self.safety.validate()
        self.speed.validate()
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _merge_dataclass(cls, base, overrides: dict, path: str):
    if not isinstance(overrides, dict):
        raise ConfigError(f"{path}: expected an object, got {type(overrides).__name__}")
    names = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in overrides.items():
        if key not in names:
            raise ConfigError(f"{path}.{key}: unknown config key")
        current = getattr(base, key)
        if dataclasses.is_dataclass(current) and isinstance(value, dict):
            kwargs[key] = _merge_dataclass(type(current), current, value, f"{path}.{key}")
        elif isinstance(current, tuple) and isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return dataclasses.replace(base, **kwargs)


def config_from_dict(overrides: dict | None) -> AppConfig:
    """Build an AppConfig from defaults plus a (possibly nested) override dict."""
    cfg = AppConfig()
    if overrides:
        cfg = _merge_dataclass(AppConfig, cfg, overrides, "config")
    return cfg.validate()


def load_config(path: str | Path | None) -> AppConfig:
    """Load config overrides from a JSON file (None -> all defaults)."""
    if path is None:
        return AppConfig().validate()
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return config_from_dict(data)


def timeout_for_route(route_length_m: float, cfg: SimConfig) -> float:
    """Episode wall: timeout_factor times the nominal traversal duration."""
    nominal = route_length_m / cfg.nominal_speed
    return max(cfg.timeout_factor * nominal, 10.0)


def deg2rad(deg: float) -> float:
    return deg * math.pi / 180.0

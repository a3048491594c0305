"""Shipped scenario builders and the name/path resolver.

Scenarios are plain dicts in the documented JSON schema (see README); the
builders here are the canonical source and the files under ``data/`` are
their exported form for use from the CLI and other tools.
"""
from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from ..world import ScenarioError

BOX_CLASS = 41          # cardboard box
MAT_CLASS = 29          # blue mat
TRASH_CLASS = 44        # trash can
SIGN_CLASS = 100        # wet-floor sign
CARRIER_CLASS = 56      # large trash carrier
ODD_CLASSES = (38, 66, 95, 120, 7)   # unfamiliar construction-site objects


def _box(cx, cy, length, width, class_id=BOX_CLASS, height=1.0, yaw_deg=0.0, oid=None):
    entry = {
        "shape": {"type": "rect", "center": [cx, cy], "size": [length, width],
                  "yaw_deg": yaw_deg},
        "class_id": class_id,
        "height": height,
    }
    if oid:
        entry["id"] = oid
    return entry


def _disc(cx, cy, radius, class_id=TRASH_CLASS, height=0.8, oid=None):
    entry = {
        "shape": {"type": "circle", "center": [cx, cy], "radius": radius},
        "class_id": class_id,
        "height": height,
    }
    if oid:
        entry["id"] = oid
    return entry


def _goal_strip(x0, y0, x1, y1):
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]


def build_hallway_a() -> dict:
    """105 m S-shaped hallway: east 45 m, north 30 m, east 30 m.

    A cluttered stretch on the first leg places boxes as close as 2 m apart
    on alternating sides; the two corners need a left cue then a right cue.
    """
    hw = 1.2
    obstacles = []
    side = 1.0
    for i, x in enumerate(range(10, 21, 2)):
        obstacles.append(_box(float(x), side * 0.75, 0.35, 0.35, oid=f"clutter{i}"))
        side = -side
    obstacles.append(_box(30.0, -0.7, 0.5, 0.5, class_id=MAT_CLASS, height=0.5, oid="mat0"))
    obstacles.append(_disc(38.0, 0.7, 0.25, oid="can0"))
    obstacles.append(_disc(45.6, 10.0, 0.25, oid="can1"))
    obstacles.append(_box(44.4, 20.0, 0.4, 0.4, oid="box-leg2"))
    obstacles.append(_disc(55.0, 29.4, 0.25, class_id=SIGN_CLASS, oid="wetsign"))
    obstacles.append(_box(64.0, 30.7, 0.45, 0.45, oid="box-leg3"))
    return {
        "name": "hallway-A",
        "floor": [
            [0.0, -hw], [46.2, -hw], [46.2, 28.8], [75.0, 28.8],
            [75.0, 31.2], [43.8, 31.2], [43.8, hw], [0.0, hw],
        ],
        "obstacles": obstacles,
        "pedestrians": [],
        "robot_start": [1.5, 0.0, 0.0],
        "route_length_m": 105.0,
        "goal_region": _goal_strip(72.4, 28.8, 73.6, 31.2),
    }


def build_hallway_b() -> dict:
    """90 m L-shaped hallway: east 50 m then south 40 m, clutter on both legs."""
    hw = 1.2
    obstacles = []
    side = -1.0
    for i, x in enumerate(range(15, 26, 2)):
        obstacles.append(_box(float(x), side * 0.75, 0.35, 0.35, oid=f"clutter{i}"))
        side = -side
    obstacles.append(_disc(34.0, 0.65, 0.25, oid="can0"))
    obstacles.append(_box(40.0, -0.7, 0.5, 0.5, class_id=MAT_CLASS, height=0.5, oid="mat0"))
    obstacles.append(_disc(50.6, -12.0, 0.25, oid="can1"))
    obstacles.append(_box(49.4, -24.0, 0.4, 0.4, oid="box-leg2"))
    return {
        "name": "hallway-B",
        "floor": [
            [0.0, -hw], [48.8, -hw], [48.8, -41.2], [51.2, -41.2],
            [51.2, hw], [0.0, hw],
        ],
        "obstacles": obstacles,
        "pedestrians": [],
        "robot_start": [1.5, 0.0, 0.0],
        "route_length_m": 90.0,
        "goal_region": _goal_strip(48.8, -39.8, 51.2, -38.6),
    }


def build_narrow() -> dict:
    """Corridor necking down to a 1.5 m-wide passage on the handler's side."""
    return {
        "name": "narrow-1.5m",
        "floor": [
            [0.0, -1.2], [16.0, -1.2], [16.0, 1.2], [12.0, 1.2],
            [10.5, 0.3], [5.5, 0.3], [4.0, 1.2], [0.0, 1.2],
        ],
        "obstacles": [],
        "pedestrians": [],
        "robot_start": [1.0, -0.3, 0.0],
        "route_length_m": 15.0,
        "goal_region": _goal_strip(13.4, -1.2, 14.6, 1.2),
    }


def build_pedestrian_headon() -> dict:
    """Oncoming person at 1 m/s appearing 3 m ahead; 1.6 m of free lateral space."""
    hw = 1.4
    return {
        "name": "pedestrian-headon",
        "floor": [[0.0, -hw], [30.0, -hw], [30.0, hw], [0.0, hw]],
        "obstacles": [],
        "pedestrians": [
            {
                "id": "walker",
                "route": [[10.8, 0.7], [0.8, 0.7]],
                "speed": 1.0,
                "radius": 0.3,
                "spawn_t": 10.0,
            },
        ],
        "robot_start": [1.0, -0.45, 0.0],
        "route_length_m": 29.0,
        "goal_region": _goal_strip(27.4, -hw, 28.6, hw),
    }


def build_pedestrian_blocked() -> dict:
    """A standing person in a corridor too narrow to pass on either side."""
    hw = 0.9
    return {
        "name": "pedestrian-blocked",
        "floor": [[0.0, -hw], [12.0, -hw], [12.0, hw], [0.0, hw]],
        "obstacles": [],
        "pedestrians": [
            {
                "id": "blocker",
                "route": [[7.0, 0.0]],
                "speed": 0.0,
                "radius": 0.4,
                "spawn_t": 0.0,
            },
        ],
        "robot_start": [1.0, 0.0, 0.0],
        "route_length_m": 11.0,
        "goal_region": _goal_strip(9.4, -hw, 10.6, hw),
    }


def build_t_junction(arm_length: float = 6.0) -> dict:
    """Symmetric T: approach east, then a north (left) or south (right) arm.

    The goal band covers both arm ends so either cued direction can complete.
    """
    xj = 8.0
    hw = 1.2
    arm = arm_length
    return {
        "name": "t-junction",
        "floor": [
            [0.0, -hw], [xj - hw, -hw], [xj - hw, -arm - hw], [xj + hw, -arm - hw],
            [xj + hw, arm + hw], [xj - hw, arm + hw], [xj - hw, hw], [0.0, hw],
        ],
        "obstacles": [],
        "pedestrians": [],
        "robot_start": [1.0, 0.0, 0.0],
        "route_length_m": xj + arm,
        "goal_region": [
            [xj - hw, -arm + 0.2], [xj + hw, -arm + 0.2], [xj + hw, arm - 0.2],
            [xj - hw, arm - 0.2], [xj - hw, arm - 1.4], [xj + 0.9, arm - 1.4],
            [xj + 0.9, -arm + 1.4], [xj - hw, -arm + 1.4],
        ],
    }


def build_sidestep() -> dict:
    """A person steps into the handler corridor just ahead-left: too close for
    the roll-out to route around, so the left cost box must drive a side-step."""
    hw = 1.6
    return {
        "name": "sidestep-clearance",
        "floor": [[0.0, -hw], [14.0, -hw], [14.0, hw], [0.0, hw]],
        "obstacles": [],
        "pedestrians": [
            {
                "id": "stander",
                "route": [[2.4, 0.75]],
                "speed": 0.0,
                "radius": 0.3,
                "spawn_t": 1.8,
            },
        ],
        "robot_start": [0.6, 0.0, 0.0],
        "route_length_m": 13.0,
        "goal_region": _goal_strip(11.4, -hw, 12.6, hw),
    }


def build_trash_carrier() -> dict:
    """Large blocker sitting on the nominal route; passable on the right."""
    hw = 1.5
    return {
        "name": "trash-carrier",
        "floor": [[0.0, -hw], [16.0, -hw], [16.0, hw], [0.0, hw]],
        "obstacles": [
            _box(8.0, 0.5, 1.2, 0.9, class_id=CARRIER_CLASS, height=1.1, oid="carrier"),
        ],
        "pedestrians": [],
        "robot_start": [1.0, 0.0, 0.0],
        "route_length_m": 15.0,
        "goal_region": _goal_strip(13.4, -hw, 14.6, hw),
    }


def build_walled() -> dict:
    """Short corridor fully walled 1 m ahead of the start; e-stop by construction."""
    hw = 1.2
    return {
        "name": "walled",
        "floor": [[0.0, -hw], [8.0, -hw], [8.0, hw], [0.0, hw]],
        "obstacles": [
            _box(2.25, 0.0, 0.5, 2.4, class_id=BOX_CLASS, height=1.5, oid="wall-box"),
        ],
        "pedestrians": [],
        "robot_start": [1.0, 0.0, 0.0],
        "route_length_m": 6.0,
        "goal_region": _goal_strip(5.4, -hw, 6.6, hw),
    }


def build_construction(seed: int = 0) -> dict:
    """Randomized unfamiliar shapes narrowing an 18 m corridor (seeded)."""
    rng = np.random.default_rng(seed)
    hw = 1.3
    obstacles = []
    x = 4.0
    i = 0
    while x < 15.0:
        side = 1 if rng.random() < 0.5 else -1
        depth = float(rng.uniform(0.4, 0.8))
        length = float(rng.uniform(0.5, 1.4))
        cy = side * (hw - depth / 2.0)
        cls = int(rng.choice(ODD_CLASSES))
        if rng.random() < 0.5:
            obstacles.append(_box(x, cy, length, depth, class_id=cls,
                                  height=float(rng.uniform(0.6, 1.6)),
                                  yaw_deg=float(rng.uniform(-15, 15)), oid=f"site{i}"))
        else:
            obstacles.append(_disc(x, cy, min(depth, length) / 2.0, class_id=cls,
                                   height=float(rng.uniform(0.6, 1.6)), oid=f"site{i}"))
        x += float(rng.uniform(2.4, 3.6))
        i += 1
    return {
        "name": "construction",
        "floor": [[0.0, -hw], [18.0, -hw], [18.0, hw], [0.0, hw]],
        "obstacles": obstacles,
        "pedestrians": [],
        "robot_start": [1.0, 0.0, 0.0],
        "route_length_m": 17.0,
        "goal_region": _goal_strip(15.4, -hw, 16.6, hw),
    }


def build_random_field(seed: int, length: float = 16.0, width: float = 3.2,
                       density: float = 0.25) -> dict:
    """Seeded random obstacle field for soak testing (density in obstacles/m^2)."""
    rng = np.random.default_rng(seed)
    hw = width / 2.0
    area = (length - 4.0) * width
    count = rng.poisson(min(density, 0.25) * area)
    obstacles = []
    for i in range(count):
        cx = float(rng.uniform(3.5, length - 1.5))
        cy = float(rng.uniform(-hw + 0.35, hw - 0.35))
        if rng.random() < 0.5:
            size = float(rng.uniform(0.25, 0.5))
            obstacles.append(_box(cx, cy, size, size, class_id=BOX_CLASS,
                                  yaw_deg=float(rng.uniform(0, 90)), oid=f"r{i}"))
        else:
            obstacles.append(_disc(cx, cy, float(rng.uniform(0.15, 0.3)), oid=f"r{i}"))
    return {
        "name": f"random-field-{seed}",
        "floor": [[0.0, -hw], [length, -hw], [length, hw], [0.0, hw]],
        "obstacles": obstacles,
        "pedestrians": [],
        "robot_start": [1.0, 0.0, 0.0],
        "route_length_m": length - 1.0,
        "goal_region": _goal_strip(length - 2.6, -hw, length - 1.4, hw),
    }


BUILDERS = {
    "hallway-A": build_hallway_a,
    "hallway-B": build_hallway_b,
    "narrow-1.5m": build_narrow,
    "pedestrian-headon": build_pedestrian_headon,
    "pedestrian-blocked": build_pedestrian_blocked,
    "t-junction": build_t_junction,
    "sidestep-clearance": build_sidestep,
    "trash-carrier": build_trash_carrier,
    "walled": build_walled,
    "construction": build_construction,
}


def resolve_scenario(source: str | Path | dict) -> dict:
    """Resolve a scenario name, JSON file path, or dict into a scenario dict."""
    if isinstance(source, dict):
        return source
    name = str(source)
    if name in BUILDERS:
        return BUILDERS[name]()
    path = Path(source)
    if path.exists():
        try:
            return json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(
                f"{path}: parse error at line {exc.lineno}: {exc.msg}") from None
    raise ScenarioError(
        f"unknown scenario '{name}' (not a shipped name, not an existing file); "
        f"shipped: {', '.join(sorted(BUILDERS))}")


def shipped_data_path(name: str) -> Path:
    """Path of the exported JSON file for a shipped scenario."""
    return Path(str(resources.files("guidenav.scenarios") / "data" / f"{name}.json"))


def export_all(directory: str | Path) -> list[Path]:
    """Write every shipped scenario to <directory>/<name>.json."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, builder in BUILDERS.items():
        path = out / f"{name}.json"
        path.write_text(json.dumps(builder(), indent=2, sort_keys=True) + "\n")
        written.append(path)
    return written

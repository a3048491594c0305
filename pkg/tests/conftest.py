import math
import time

import pytest

from guidenav.config import AppConfig

HALLWAY_A_CUES = [
    {"t": 56.0, "button": "down"}, {"t": 59.0, "button": "down"},
    {"t": 100.0, "button": "up"}, {"t": 103.0, "button": "up"},
    {"t": 106.0, "button": "up"},
]
HALLWAY_B_CUES = [
    {"t": 66.0, "button": "up"}, {"t": 69.0, "button": "up"},
    {"t": 72.0, "button": "up"},
]


def corridor_scenario(length=20.0, width=4.0, obstacles=(), pedestrians=(),
                      route_length=None, name="corridor", goal_depth=1.0,
                      start_x=1.0, start_y=0.0):
    """Straight rectangular corridor along +x, centered on y=0."""
    hw = width / 2.0
    return {
        "name": name,
        "floor": [[0.0, -hw], [length, -hw], [length, hw], [0.0, hw]],
        "obstacles": list(obstacles),
        "pedestrians": list(pedestrians),
        "robot_start": [start_x, start_y, 0.0],
        "route_length_m": route_length if route_length is not None else length - start_x,
        "goal_region": [
            [length - 1.4 - goal_depth, -hw], [length - 1.4, -hw],
            [length - 1.4, hw], [length - 1.4 - goal_depth, hw],
        ],
    }


def box_obstacle(cx, cy, size=0.4, class_id=41, height=1.0, oid=None):
    return {
        "shape": {"type": "rect", "center": [cx, cy], "size": [size, size]},
        "class_id": class_id,
        "height": height,
        **({"id": oid} if oid else {}),
    }


@pytest.fixture(scope="session")
def default_config() -> AppConfig:
    return AppConfig().validate()


@pytest.fixture(scope="session")
def hallway_a_run():
    """(log, wall_seconds) for the cued 105 m hallway; shared across modules."""
    from guidenav.harness import run_episode

    t0 = time.perf_counter()
    log = run_episode("hallway-A", presses=HALLWAY_A_CUES, seed=0)
    return log, time.perf_counter() - t0


@pytest.fixture(scope="session")
def hallway_b_run():
    """(log, wall_seconds) for the cued 90 m hallway; shared across modules."""
    from guidenav.harness import run_episode

    t0 = time.perf_counter()
    log = run_episode("hallway-B", presses=HALLWAY_B_CUES, seed=0)
    return log, time.perf_counter() - t0


def angles_close(a, b, tol=1e-9):
    return abs(math.remainder(a - b, math.tau)) <= tol

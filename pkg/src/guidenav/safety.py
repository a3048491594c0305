"""Rule-based safety layer: front e-stop box, left clearance box with
side-stepping, the incremental speed state, and final command arbitration."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import ConfigError, CostBoxConfig, SpeedConfig
from .handle import Command
from .perception import BevCostMap
from .planner import PlanResult
from .world import VelocityCommand

OCCUPIED_COST = 100


@dataclass(frozen=True)
class SpeedState:
    """Commanded walking speed held on the v_min + k*step lattice.

    The integer index makes the lattice invariant exact under any press
    sequence; the float speed is derived, never accumulated.
    """

    index: int
    cfg: SpeedConfig

    @classmethod
    def from_config(cls, cfg: SpeedConfig) -> "SpeedState":
        cfg.validate()
        return cls(int(round((cfg.v_default - cfg.v_min) / cfg.step)), cfg)

    @property
    def commanded_speed(self) -> float:
        return self.cfg.v_min + self.index * self.cfg.step

    @property
    def max_index(self) -> int:
        return int(round((self.cfg.v_max - self.cfg.v_min) / self.cfg.step))


def update_speed(state: SpeedState, cmd: Command) -> SpeedState:
    """Step the speed by one 0.05 m/s increment, clamped to [v_min, v_max]."""
    if cmd.kind == "SpeedUp":
        index = min(state.index + 1, state.max_index)
    elif cmd.kind == "SlowDown":
        index = max(state.index - 1, 0)
    else:
        raise ValueError(f"not a speed command: {cmd.kind}")
    return replace(state, index=index)


def box_occupancy(cost_map: BevCostMap, box: CostBoxConfig) -> float:
    """Fraction of known cells inside the box at or above the occupied cost.

    Unknown cells are excluded from both sides of the ratio; a box with no
    known cells reads fully occupied (fail-safe).
    """
    res = cost_map.resolution
    r0 = int(np.floor((box.x_min - cost_map.x_min) / res))
    r1 = int(np.ceil((box.x_max - cost_map.x_min) / res))
    c0 = int(np.floor((box.y_min - cost_map.y_min) / res))
    c1 = int(np.ceil((box.y_max - cost_map.y_min) / res))
    r0c, r1c = max(r0, 0), min(r1, cost_map.rows)
    c0c, c1c = max(c0, 0), min(c1, cost_map.cols)
    if r0c >= r1c or c0c >= c1c:
        raise ConfigError(
            f"cost box [{box.x_min},{box.x_max}]x[{box.y_min},{box.y_max}] "
            f"does not intersect the {cost_map.camera} map extent")
    cells = cost_map.grid[r0c:r1c, c0c:c1c]
    known = ~cost_map.unknown[r0c:r1c, c0c:c1c]
    total = int(known.sum())
    if total == 0:
        return 1.0
    occupied = int((known & (cells >= OCCUPIED_COST)).sum())
    return occupied / total


def front_estop(front_map: BevCostMap, box: CostBoxConfig,
                threshold: float | None = None) -> bool:
    thr = box.threshold if threshold is None else threshold
    return box_occupancy(front_map, box) >= thr


def left_clear(left_map: BevCostMap, box: CostBoxConfig,
               threshold: float | None = None) -> bool:
    thr = box.threshold if threshold is None else threshold
    return box_occupancy(left_map, box) < thr


def arbitrate(plan: PlanResult, estop: bool, left_ok: bool, speed: SpeedState,
              sidestep_speed: float = 0.15) -> VelocityCommand:
    """Final command priority: halt on e-stop or a blocked plan, otherwise
    side-step right while the handler corridor is obstructed, otherwise
    follow the planned curvature at the commanded speed."""
    if estop or plan.blocked:
        return VelocityCommand(0.0, 0.0, 0.0, estop_active=True)
    if not left_ok:
        return VelocityCommand(0.0, sidestep_speed, 0.0, sidestep_active=True)
    return VelocityCommand(speed.commanded_speed, 0.0, plan.chosen_curvature)

"""Score the 40-arc roll-out fan against a hand-built cost map.

Shows how the fan reacts to an obstacle on one side, and how a handler cue
biases the selection without overriding the free-length safety floor.
"""
import numpy as np

from guidenav.config import PlannerConfig
from guidenav.perception import BevCostMap
from guidenav.planner import DirectionalBias, generate_rollouts, select_best

cfg = PlannerConfig()
groups = generate_rollouts(cfg)
print(f"{len(groups)} arcs, curvature {groups[0].curvature:+.2f} .. "
      f"{groups[-1].curvature:+.2f} 1/m, "
      f"{len(groups[0].offsets)} member lines each")


def show(title, plan):
    print(f"\n{title}")
    print(f"  chosen curvature {plan.chosen_curvature:+.3f} 1/m "
          f"(blocked={plan.blocked})")
    print(f"  free length {plan.chosen_cost.free_length:.1f} m, "
          f"total cost {plan.chosen_cost.total:.1f}")


empty = BevCostMap(np.zeros((80, 60), np.uint8), np.zeros((80, 60), bool),
                   0.05, 0.0, -1.5, "front")
show("empty map", select_best(groups, empty, DirectionalBias.none(), cfg))

# box blocking the left half from 2 m out
grid = np.zeros((80, 60), np.uint8)
grid[40:52, 30:] = 200
left_blocked = BevCostMap(grid, np.zeros((80, 60), bool), 0.05, 0.0, -1.5, "front")
show("obstacle ahead-left", select_best(groups, left_blocked,
                                        DirectionalBias.none(), cfg))

bias = DirectionalBias("left", cfg.bias_magnitude, 0.0, 6.0)
show("same map + LEFT cue (biases, never overrides)",
     select_best(groups, left_blocked, bias, cfg))

wall = np.full((80, 60), 200, np.uint8)
wall[:24, :] = 0
blocked_map = BevCostMap(wall, np.zeros((80, 60), bool), 0.05, 0.0, -1.5, "front")
show("wall across the whole map", select_best(groups, blocked_map,
                                              DirectionalBias.none(), cfg))

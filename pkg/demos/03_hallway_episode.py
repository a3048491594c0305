"""Run the full 105 m hallway with scripted handler cues and print metrics.

The handler presses DOWN (turn left) before the first corner and UP (turn
right) before the second; everything else is the local planner avoiding the
clutter on its own.
"""
import time

from guidenav.harness import compute_metrics, run_episode

cues = [
    {"t": 56.0, "button": "down"}, {"t": 59.0, "button": "down"},
    {"t": 100.0, "button": "up"}, {"t": 103.0, "button": "up"},
    {"t": 106.0, "button": "up"},
]

t0 = time.perf_counter()
log = run_episode("hallway-A", presses=cues, seed=0)
wall = time.perf_counter() - t0

m = compute_metrics(log)
print(f"outcome: {log.end['reason']} after {m.elapsed:.1f} s simulated "
      f"({wall:.1f} s wall)")
print(f"distance {m.distance_traveled:.1f} m at mean {m.mean_speed:.2f} m/s")
print(f"collisions {m.collisions}, min clearance {m.min_clearance:.2f} m, "
      f"e-stops {m.estop_count}, side-step time {m.sidestep_time:.1f} s")

commands = [e for e in log.events if e["kind"] == "command"]
print("decoded commands:",
      ", ".join(f"{e['command']}@{e['t']:.1f}s" for e in commands))

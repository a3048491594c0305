"""Stress the pipeline with label noise over a handful of seeded runs.

Each episode corrupts 5% of segmentation pixels per frame and stamps three
random-class discs, then walks the 90 m hallway.
"""
from guidenav.config import config_from_dict
from guidenav.harness import compute_metrics, run_episode

cues = [{"t": 66.0, "button": "up"}, {"t": 69.0, "button": "up"},
        {"t": 72.0, "button": "up"}]
cfg = config_from_dict(
    {"pipeline": {"noise": {"pixel_flip_rate": 0.05, "blob_count": 3}}})

completed = 0
for seed in range(5):
    log = run_episode("hallway-B", cfg, presses=cues, seed=seed)
    m = compute_metrics(log)
    completed += m.completed
    print(f"seed {seed}: {log.end['reason']:8s} mean {m.mean_speed:.2f} m/s, "
          f"collisions {m.collisions}, clearance {m.min_clearance:.2f} m")
print(f"\n{completed}/5 noisy episodes completed")

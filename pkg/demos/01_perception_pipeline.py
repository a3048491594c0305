"""Walk one camera frame through the full perception chain.

Renders the ground-truth segmentation for a cluttered corridor, corrupts it
with label noise, binarizes traversability, scales to the grayscale cost
image and projects it into the metric BEV grid.  Writes PGMs next to this
script so the stages can be eyeballed.
"""
from pathlib import Path

import numpy as np

from guidenav.config import PipelineConfig
from guidenav.perception import (
    BevProjector,
    CameraModel,
    NoiseSpec,
    binarize,
    despeckle_binary,
    inject_noise,
    to_cost_image,
    write_pgm,
)
from guidenav.render import SceneRenderer
from guidenav.scenarios import resolve_scenario
from guidenav.world import RobotState, load_world

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

cfg = PipelineConfig()
world = load_world(resolve_scenario("hallway-A"))
state = RobotState(12.0, -0.2, 0.05)

camera = CameraModel(cfg.front_camera)
renderer = SceneRenderer(camera, world, cfg)
frame = renderer.render(world, state)
print(f"rendered front frame: {frame.labels.shape}, "
      f"{len(np.unique(frame.labels))} distinct classes")

noisy = inject_noise(frame, NoiseSpec(0.05, 3, 6, seed=7))
flipped = (noisy.labels != frame.labels).mean()
print(f"label noise: {flipped:.1%} of pixels corrupted")

binary = binarize(noisy.labels, set(cfg.traversable_classes))
clean = despeckle_binary(binary)
gray = to_cost_image(clean)
print(f"binary non-traversable fraction: raw {binary.mean():.3f}, "
      f"despeckled {clean.mean():.3f}")

bev = BevProjector(camera, cfg.front_grid).project(gray)
known = ~bev.unknown
print(f"BEV {bev.rows}x{bev.cols} cells at {bev.resolution} m: "
      f"{known.mean():.0%} known, "
      f"{(bev.grid[known] >= 100).mean():.1%} of known cells blocked")

write_pgm(out / "seg.pgm", frame.labels)
write_pgm(out / "seg_noisy.pgm", noisy.labels)
write_pgm(out / "cost.pgm", gray)
write_pgm(out / "bev.pgm", np.where(bev.unknown, 255, bev.grid))
print(f"stage images written to {out}/")

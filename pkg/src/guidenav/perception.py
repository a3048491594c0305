"""Camera model, semantic-frame operations and bird's-eye-view projection.

The image chain per perception tick: render (see ``render.py``) -> optional
label noise -> binarize traversability -> despeckle -> scale by 200 -> sample
into metric BEV cost grids via the ground-plane homography.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import BevGridConfig, CameraConfig, deg2rad

NUM_CLASSES = 150
COST_SCALE = 200
UNKNOWN_COST = 200


class GeometryError(ValueError):
    """Degenerate camera/grid geometry."""


@dataclass(frozen=True)
class SegmentationFrame:
    """Per-pixel class labels in [0, 150) from one simulated camera."""

    labels: np.ndarray          # (H, W) uint8
    timestamp: float
    camera: str                 # "front" | "left"


@dataclass(frozen=True)
class NoiseSpec:
    pixel_flip_rate: float
    blob_count: int
    blob_radius: int
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.pixel_flip_rate <= 1.0:
            raise ValueError("pixel_flip_rate must be in [0, 1]")
        if self.blob_count < 0:
            raise ValueError("blob_count must be >= 0")


@dataclass(frozen=True)
class BevCostMap:
    """Metric traversability-cost grid in the robot frame.

    Row i spans x in [x_min + i*res, ...), column j spans y likewise; cell
    values are in [0, 200] and cells without image support are flagged
    unknown and carry the fail-safe cost 200.
    """

    grid: np.ndarray            # (rows, cols) uint8
    unknown: np.ndarray         # (rows, cols) bool
    resolution: float
    x_min: float
    y_min: float
    camera: str

    @property
    def rows(self) -> int:
        return self.grid.shape[0]

    @property
    def cols(self) -> int:
        return self.grid.shape[1]


class CameraModel:
    """Pinhole camera rigidly mounted on the robot (no roll)."""

    def __init__(self, cfg: CameraConfig):
        cfg.validate()
        self.cfg = cfg
        self.mount = cfg.mount
        psi = deg2rad(cfg.yaw_deg)
        phi = deg2rad(cfg.pitch_deg)
        fwd = np.array([math.cos(phi) * math.cos(psi),
                        math.cos(phi) * math.sin(psi),
                        -math.sin(phi)])
        right = np.array([math.sin(psi), -math.cos(psi), 0.0])
        down = np.cross(fwd, right)
        # columns are the camera axes (x right, y down, z forward) in robot coords
        self.rot = np.column_stack([right, down, fwd])
        self.origin = np.array([cfg.x, cfg.y, cfg.height])
        self.K = np.array([[cfg.fx, 0.0, cfg.cx],
                           [0.0, cfg.fy, cfg.cy],
                           [0.0, 0.0, 1.0]])
        self.K_inv = np.linalg.inv(self.K)
        self.width = cfg.width
        self.height_px = cfg.height_px
        self.yaw = psi

    def pixel_directions(self) -> np.ndarray:
        """Ray direction for every pixel, robot frame, shape (H, W, 3)."""
        u = np.arange(self.width, dtype=np.float64)
        v = np.arange(self.height_px, dtype=np.float64)
        uu, vv = np.meshgrid(u, v)
        px = (uu - self.cfg.cx) / self.cfg.fx
        py = (vv - self.cfg.cy) / self.cfg.fy
        dirs = np.stack([px, py, np.ones_like(px)], axis=-1)
        return dirs @ self.rot.T

    def project_points(self, pts_robot: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Project robot-frame 3D points; returns (u, v, camera depth)."""
        rel = np.atleast_2d(pts_robot) - self.origin
        cam = rel @ self.rot         # rot is orthonormal: R^T applied via right-mult
        z = cam[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.cfg.fx * cam[:, 0] / z + self.cfg.cx
            v = self.cfg.fy * cam[:, 1] / z + self.cfg.cy
        return u, v, z


# ---------------------------------------------------------------------------
# frame operations

def binarize(frame: SegmentationFrame | np.ndarray,
             traversable_ids: set[int] | tuple[int, ...]) -> np.ndarray:
    """0 where the class is traversable, 1 elsewhere (fail-safe for unknown ids)."""
    ids = set(traversable_ids)
    if not ids:
        raise ValueError("traversable_ids must be non-empty")
    labels = frame.labels if isinstance(frame, SegmentationFrame) else frame
    lut = np.ones(256, dtype=np.uint8)
    for cid in ids:
        if 0 <= cid < NUM_CLASSES:
            lut[cid] = 0
    return lut[labels]


def despeckle_binary(binary: np.ndarray) -> np.ndarray:
    """3x3 majority vote (the median of a binary image), edge-replicated.

    Removes isolated label flips without moving object boundaries by more
    than one pixel; monotone, so it preserves the cost-monotonicity property.
    """
    padded = np.pad(binary, 1, mode="edge").astype(np.uint8)
    acc = np.zeros(binary.shape, dtype=np.uint8)
    h, w = binary.shape
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            acc += padded[dy:dy + h, dx:dx + w]
    return (acc >= 5).astype(np.uint8)


def to_cost_image(binary: np.ndarray) -> np.ndarray:
    """Scale the binary non-traversability mask by 200 into a grayscale image."""
    return (binary.astype(np.uint8)) * np.uint8(COST_SCALE)


def inject_noise(frame: SegmentationFrame, spec: NoiseSpec) -> SegmentationFrame:
    """Corrupt labels: independent per-pixel flips plus random class discs.

    Flipped pixels take a uniformly random *other* class.  Bitwise
    deterministic for equal (frame, spec.seed).
    """
    if spec.pixel_flip_rate == 0.0 and spec.blob_count == 0:
        return frame
    rng = np.random.default_rng(spec.seed)
    labels = frame.labels.copy()
    h, w = labels.shape
    if spec.pixel_flip_rate > 0.0:
        mask = rng.random(labels.shape) < spec.pixel_flip_rate
        count = int(mask.sum())
        if count:
            repl = rng.integers(0, NUM_CLASSES - 1, size=count).astype(np.uint8)
            old = labels[mask]
            repl = repl + (repl >= old).astype(np.uint8)   # uniform over other classes
            labels[mask] = repl
    for _ in range(spec.blob_count):
        cu = int(rng.integers(0, w))
        cv = int(rng.integers(0, h))
        cls = int(rng.integers(0, NUM_CLASSES))
        r = int(spec.blob_radius)
        v0, v1 = max(0, cv - r), min(h, cv + r + 1)
        u0, u1 = max(0, cu - r), min(w, cu + r + 1)
        vv, uu = np.mgrid[v0:v1, u0:u1]
        disc = (vv - cv) ** 2 + (uu - cu) ** 2 <= r * r
        patch = labels[v0:v1, u0:u1]
        patch[disc] = cls
    return SegmentationFrame(labels, frame.timestamp, frame.camera)


# ---------------------------------------------------------------------------
# homography and BEV projection

def ground_homography(camera: CameraModel) -> np.ndarray:
    """3x3 map from pixel coords to ground-plane (z=0) robot-frame meters.

    Raises GeometryError when the camera does not look at the ground in the
    lower image region (optical axis at or above the horizontal there).
    """
    rt = camera.rot.T
    t = rt @ (-camera.origin)
    ground_to_image = camera.K @ np.column_stack([rt[:, 0], rt[:, 1], t])
    det = np.linalg.det(ground_to_image)
    if abs(det) < 1e-9:
        raise GeometryError("degenerate ground homography (determinant ~ 0)")
    h = np.linalg.inv(ground_to_image)
    h /= h[2, 2]
    if camera.rot[2, 2] >= 0:   # optical axis level with or above the ground plane
        raise GeometryError("camera optical axis does not descend toward the ground")
    # bottom-center pixel must strike the ground within 3 m ahead of the camera
    ray = camera.rot @ camera.K_inv @ np.array([camera.cfg.cx,
                                                camera.height_px - 1.0, 1.0])
    if ray[2] >= 0:
        raise GeometryError("camera lower image region does not face the ground")
    hit = camera.origin + (-camera.origin[2] / ray[2]) * ray
    ahead = math.hypot(hit[0] - camera.origin[0], hit[1] - camera.origin[1])
    if ahead > 3.0:
        raise GeometryError(
            f"bottom-center pixel hits ground {ahead:.2f} m from the camera (> 3 m)")
    return h


class BevProjector:
    """Precomputed nearest-pixel sampler from image space into a BEV grid."""

    def __init__(self, camera: CameraModel, grid: BevGridConfig):
        grid.validate()
        self.camera = camera
        self.grid = grid
        rows, cols = grid.rows, grid.cols
        # symmetric center construction keeps +-y cell pairs exact float negations
        xs = (grid.x_min + grid.x_max) / 2.0 \
            + (np.arange(rows) - (rows - 1) / 2.0) * grid.resolution
        ys = (grid.y_min + grid.y_max) / 2.0 \
            + (np.arange(cols) - (cols - 1) / 2.0) * grid.resolution
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel(), np.zeros(rows * cols)], axis=-1)
        u, v, depth = camera.project_points(pts)
        known = depth > 0.05     # in front of the camera, never at/above the horizon
        ui = np.floor(u + 0.5).astype(np.int64)
        vi = np.floor(v + 0.5).astype(np.int64)
        known &= (ui >= 0) & (ui < camera.width) & (vi >= 0) & (vi < camera.height_px)
        self.known = known.reshape(rows, cols)
        self.ui = np.where(known, ui, 0).reshape(rows, cols)
        self.vi = np.where(known, vi, 0).reshape(rows, cols)

    def project(self, gray: np.ndarray, timestamp: float = 0.0) -> BevCostMap:
        vals = gray[self.vi, self.ui].astype(np.uint8)
        vals[~self.known] = UNKNOWN_COST
        return BevCostMap(
            grid=vals,
            unknown=~self.known,
            resolution=self.grid.resolution,
            x_min=self.grid.x_min,
            y_min=self.grid.y_min,
            camera=self.camera.mount,
        )

    def project_binary_majority(self, binary: np.ndarray) -> BevCostMap:
        """Sampled-pixel fast path: 3x3 majority at each sampled pixel only.

        Equals despeckle_binary -> to_cost_image -> project at every sampled
        cell (interior pixels see the same 3x3 window; the projector never
        samples the one-pixel border for the shipped camera geometries).
        """
        h, w = binary.shape
        vi = np.clip(self.vi, 1, h - 2)
        ui = np.clip(self.ui, 1, w - 2)
        acc = np.zeros(vi.shape, dtype=np.uint8)
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                acc += binary[vi + dy, ui + dx]
        vals = np.where(acc >= 5, COST_SCALE, 0).astype(np.uint8)
        vals[~self.known] = UNKNOWN_COST
        return BevCostMap(
            grid=vals,
            unknown=~self.known,
            resolution=self.grid.resolution,
            x_min=self.grid.x_min,
            y_min=self.grid.y_min,
            camera=self.camera.mount,
        )


def project_bev(gray: np.ndarray, camera: CameraModel, grid: BevGridConfig) -> BevCostMap:
    """One-shot BEV projection (tests/tools); loops should hold a BevProjector."""
    return BevProjector(camera, grid).project(gray)


# ---------------------------------------------------------------------------
# frame dumps (PGM + JSON index)

def write_pgm(path: str | Path, image: np.ndarray) -> None:
    arr = np.ascontiguousarray(image.astype(np.uint8))
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode()
    Path(path).write_bytes(header + arr.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    idx = 0
    while len(fields) < 4:
        end = data.index(b"\n", idx)
        token = data[idx:end]
        if not token.startswith(b"#"):
            fields.extend(token.split())
        idx = end + 1
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h = int(fields[1]), int(fields[2])
    return np.frombuffer(data[idx:idx + w * h], dtype=np.uint8).reshape(h, w)


class FrameDumper:
    """Writes per-tick segmentation + cost PGMs with a JSON index."""

    def __init__(self, directory: str | Path):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.entries: list[dict] = []

    def add(self, tick: int, frame: SegmentationFrame, gray: np.ndarray) -> None:
        seg_name = f"seg_{frame.camera}_{tick:06d}.pgm"
        cost_name = f"cost_{frame.camera}_{tick:06d}.pgm"
        write_pgm(self.dir / seg_name, frame.labels)
        write_pgm(self.dir / cost_name, gray)
        self.entries.append({
            "tick": tick,
            "t": frame.timestamp,
            "camera": frame.camera,
            "seg": seg_name,
            "cost": cost_name,
        })

    def close(self) -> None:
        index = {"format": "guidenav-frames-v1", "frames": self.entries}
        (self.dir / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True))

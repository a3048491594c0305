"""Curvature roll-out local planner.

A fixed fan of constant-curvature arcs is precomputed once; every planning
tick each arc's member lines (body edges plus the handler corridor) are
scored against the front BEV cost map for free length and visual cost, a
handler cue biases the total toward one side, and the cheapest arc whose
free length clears the safety floor wins.  Positive curvature turns right.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import ConfigError, PlannerConfig
from .handle import Command
from .perception import BevCostMap, UNKNOWN_COST
from .world import normalize_angle


@dataclass(frozen=True)
class Trajectory:
    curvature: float
    samples: np.ndarray         # (S, 2) robot-frame points at fixed arc spacing
    max_arc_length: float
    spacing: float


@dataclass(frozen=True)
class TrajectoryGroup:
    center: Trajectory
    offsets: tuple[Trajectory, ...]     # evaluated member lines
    line_offsets: tuple[float, ...]

    @property
    def curvature(self) -> float:
        return self.center.curvature


@dataclass(frozen=True)
class CostBreakdown:
    visual_cost: float
    free_length: float
    bias_term: float
    total: float


@dataclass(frozen=True)
class DirectionalBias:
    direction: str              # "left" | "right" | "none"
    magnitude: float
    issued_at: float
    expires_at: float

    @classmethod
    def none(cls) -> "DirectionalBias":
        return cls("none", 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class PlanResult:
    chosen_curvature: float
    chosen_cost: CostBreakdown
    all_costs: tuple[CostBreakdown, ...]
    blocked: bool
    chosen_index: int           # -1 when blocked


def curvature_grid(kappa_min: float, kappa_max: float, n: int) -> np.ndarray:
    """n curvatures, uniformly spaced with both endpoints; when the range
    brackets zero and the grid misses it, the smallest-|k| point snaps to 0."""
    if n < 2 or kappa_min >= kappa_max:
        raise ConfigError("need n >= 2 and kappa_min < kappa_max")
    if kappa_min == -kappa_max:
        # build one side and mirror it so +-pairs are exact float negations
        step = (kappa_max - kappa_min) / (n - 1)
        pos = kappa_max - step * np.arange(n // 2)      # kappa_max downward
        if n % 2:
            grid = np.concatenate([-pos, [0.0], pos[::-1]])
        else:
            grid = np.concatenate([-pos, pos[::-1]])
    else:
        grid = np.linspace(kappa_min, kappa_max, n)
    if n > 2 and kappa_min < 0.0 < kappa_max and not np.any(grid == 0.0):
        interior = grid[1:-1]
        idx = 1 + int(np.argmin(np.abs(interior)))
        # prefer snapping the non-negative one of a symmetric central pair
        if idx + 1 < n - 1 and abs(grid[idx + 1]) == abs(grid[idx]):
            idx += 1
        grid[idx] = 0.0
    return grid


def _arc_points(kappa: float, arc_lengths: np.ndarray, lateral: float,
                kappa_epsilon: float = 1e-9) -> np.ndarray:
    """Points of the constant-lateral-offset line of a centered arc."""
    if abs(kappa) < kappa_epsilon:
        return np.stack([arc_lengths, np.full_like(arc_lengths, lateral)], axis=-1)
    ang = kappa * arc_lengths
    x = np.sin(ang) * (1.0 / kappa + lateral)
    y = -(1.0 - np.cos(ang)) / kappa + lateral * np.cos(ang)
    return np.stack([x, y], axis=-1)


def generate_rollouts(cfg: PlannerConfig) -> list[TrajectoryGroup]:
    """Precompute the full trajectory fan; map-independent, reused every tick."""
    cfg.validate()
    kappas = curvature_grid(cfg.kappa_min, cfg.kappa_max, cfg.n_trajectories)
    steps = int(round((cfg.max_arc_length - cfg.sample_start) / cfg.sample_spacing))
    arc_lengths = cfg.sample_start + cfg.sample_spacing * np.arange(1, steps + 1)
    groups = []
    for kappa in kappas:
        center = Trajectory(float(kappa), _arc_points(kappa, arc_lengths, 0.0),
                            cfg.max_arc_length, cfg.sample_spacing)
        lines = tuple(
            Trajectory(float(kappa), _arc_points(kappa, arc_lengths, d),
                       cfg.max_arc_length, cfg.sample_spacing)
            for d in cfg.line_offsets)
        groups.append(TrajectoryGroup(center, lines, cfg.line_offsets))
    return groups


# ---------------------------------------------------------------------------
# handler cue bias

def bias_from_command(cmd: Command, now: float, cfg: PlannerConfig) -> DirectionalBias:
    if cmd.kind not in ("TurnLeft", "TurnRight"):
        raise ValueError(f"not a direction command: {cmd.kind}")
    direction = "right" if cmd.kind == "TurnRight" else "left"
    return DirectionalBias(direction, cfg.bias_magnitude, now, now + cfg.bias_duration)


def effective_bias(bias: DirectionalBias, now: float) -> DirectionalBias:
    """Expiry semantics: a stale bias reads as none."""
    if bias.direction == "none" or now > bias.expires_at:
        return DirectionalBias.none()
    return bias


class BiasTracker:
    """Holds the active cue; cancels on expiry or after enough heading change.

    Latest cue wins.  The heading-change cancel makes a cue self-clearing
    once the turn it requested has actually been taken.
    """

    def __init__(self, cfg: PlannerConfig):
        self.cfg = cfg
        self._bias = DirectionalBias.none()
        self._issue_heading = 0.0

    def command(self, cmd: Command, now: float, heading: float) -> None:
        self._bias = bias_from_command(cmd, now, self.cfg)
        self._issue_heading = heading

    def current(self, now: float, heading: float) -> DirectionalBias:
        if self._bias.direction == "none":
            return self._bias
        turned = abs(normalize_angle(heading - self._issue_heading))
        if now > self._bias.expires_at or \
                turned >= math.radians(self.cfg.bias_heading_cancel_deg):
            self._bias = DirectionalBias.none()
        return self._bias


def _bias_term(kappa: float, bias: DirectionalBias, cfg: PlannerConfig) -> float:
    if bias.direction == "none" or kappa == 0.0:
        return 0.0
    kappa_scale = max(abs(cfg.kappa_min), abs(cfg.kappa_max))
    toward = 1.0 if (kappa > 0.0) == (bias.direction == "right") else -1.0
    return -bias.magnitude * toward * abs(kappa) / kappa_scale


# ---------------------------------------------------------------------------
# evaluation

def _dilate(mask: np.ndarray, cells: int) -> np.ndarray:
    grown = mask.copy()
    for _ in range(cells):
        padded = np.pad(grown, 1)
        out = np.zeros_like(grown)
        for dr in (0, 1, 2):
            for dc in (0, 1, 2):
                out |= padded[dr:dr + grown.shape[0], dc:dc + grown.shape[1]]
        grown = out
    return grown


def inflate_costmap(cost_map: BevCostMap, hard_cells: int, soft_cells: int = 0,
                    soft_cost: int = 30, threshold: int = 100) -> BevCostMap:
    """Planner's view of the map: blocked cells grow by a hard ring, then a
    soft sub-threshold ring that charges for skimming close.

    Unknown cells are left untouched: inflating them would wall off the
    camera frustum edges that high-curvature arcs legitimately skirt.
    """
    if hard_cells <= 0 and soft_cells <= 0:
        return cost_map
    blocked = (cost_map.grid >= threshold) & ~cost_map.unknown
    hard = _dilate(blocked, hard_cells) if hard_cells > 0 else blocked
    grid = cost_map.grid.copy()
    grid[hard & ~cost_map.unknown] = UNKNOWN_COST
    if soft_cells > 0:
        soft = _dilate(hard, soft_cells) & ~hard & ~cost_map.unknown
        grid[soft] = np.maximum(grid[soft], np.uint8(soft_cost))
    return replace(cost_map, grid=grid)


def _sample_costs(points: np.ndarray, cost_map: BevCostMap) -> np.ndarray:
    """(cost, blocking) for cells under robot-frame points.

    Samples beyond the map extent block fail-safe.  Samples on cells inside
    the extent but outside the camera frustum (the camera's permanent blind
    wedge beside the robot, which the cost boxes guard with the other
    camera) are skipped: zero cost and non-blocking.  The metric extent is
    closed: a point exactly on the far edge samples the last cell.
    """
    fx = (points[..., 0] - cost_map.x_min) / cost_map.resolution
    fy = (points[..., 1] - cost_map.y_min) / cost_map.resolution
    inmap = (fx >= 0) & (fx <= cost_map.rows) & (fy >= 0) & (fy <= cost_map.cols)
    r = np.clip(np.floor(fx), 0, cost_map.rows - 1).astype(np.int64)
    c = np.clip(np.floor(fy), 0, cost_map.cols - 1).astype(np.int64)
    skip = cost_map.unknown[r, c] & inmap
    costs = cost_map.grid[r, c].astype(np.float64)
    costs[~inmap] = UNKNOWN_COST
    costs[skip] = 0.0
    return costs, ~inmap, skip


def evaluate_group(group: TrajectoryGroup, cost_map: BevCostMap,
                   bias: DirectionalBias, cfg: PlannerConfig) -> CostBreakdown:
    """Score one group: free length up to the first blocked sample on any
    member line, visual cost of the free stretch, plus the directional bias
    term.  Off-map samples block; frustum-blind cells are skipped."""
    pts = np.stack([line.samples for line in group.offsets])     # (L, S, 2)
    costs, offmap, skip = _sample_costs(pts, cost_map)
    blocked_cell = offmap | (~skip & (costs >= cfg.block_threshold))
    blocked_at = blocked_cell.any(axis=0)                        # (S,)
    steps = pts.shape[1]
    first = int(np.argmax(blocked_at)) if blocked_at.any() else steps
    free_length = cfg.sample_start + first * cfg.sample_spacing
    visual = float(costs[:, :first].sum())
    bias_term = _bias_term(group.curvature, bias, cfg)
    total = cfg.w_visual * visual \
        + cfg.w_length * (cfg.max_arc_length - free_length) + bias_term
    return CostBreakdown(visual, free_length, bias_term, total)


class RolloutEvaluator:
    """Vectorized evaluation of all groups at once (the 20 Hz fast path)."""

    def __init__(self, groups: list[TrajectoryGroup], cfg: PlannerConfig):
        self.groups = groups
        self.cfg = cfg
        self.kappas = np.array([g.curvature for g in groups])
        self.points = np.stack([
            np.stack([line.samples for line in g.offsets]) for g in groups
        ])                                                       # (G, L, S, 2)
        self.steps = self.points.shape[2]
        kappa_scale = max(abs(cfg.kappa_min), abs(cfg.kappa_max))
        self._bias_shape = -np.abs(self.kappas) / kappa_scale

    def evaluate(self, cost_map: BevCostMap, bias: DirectionalBias) -> PlanResult:
        cfg = self.cfg
        costs, offmap, skip = _sample_costs(self.points, cost_map)   # (G, L, S)
        blocked_cell = offmap | (~skip & (costs >= cfg.block_threshold))
        blocked_at = blocked_cell.any(axis=1)                    # (G, S)
        has_block = blocked_at.any(axis=1)
        first = np.where(has_block, np.argmax(blocked_at, axis=1), self.steps)
        free_length = cfg.sample_start + first * cfg.sample_spacing

        # visual cost covers the free stretch only (strictly before the block)
        idx = np.arange(self.steps)
        visible = idx[None, None, :] < first[:, None, None]
        visual = (costs * visible).sum(axis=(1, 2))

        if bias.direction == "right":
            bias_terms = bias.magnitude * self._bias_shape * np.sign(self.kappas)
        elif bias.direction == "left":
            bias_terms = -bias.magnitude * self._bias_shape * np.sign(self.kappas)
        else:
            bias_terms = np.zeros_like(self.kappas)

        totals = cfg.w_visual * visual \
            + cfg.w_length * (cfg.max_arc_length - free_length) + bias_terms

        breakdowns = tuple(
            CostBreakdown(float(visual[i]), float(free_length[i]),
                          float(bias_terms[i]), float(totals[i]))
            for i in range(len(self.groups)))

        eligible = free_length >= cfg.min_free_length
        order_idx = self._argmin(totals, eligible if eligible.any() else None)
        if eligible.any():
            return PlanResult(float(self.kappas[order_idx]), breakdowns[order_idx],
                              breakdowns, False, int(order_idx))
        return PlanResult(0.0, breakdowns[order_idx], breakdowns, True, -1)

    def _argmin(self, totals: np.ndarray, eligible: np.ndarray | None) -> int:
        masked = totals if eligible is None else np.where(eligible, totals, np.inf)
        best = masked.min()
        tie = np.nonzero(masked == best)[0]
        # ties break toward smaller |k|, then toward k >= 0
        key = sorted(tie, key=lambda i: (abs(self.kappas[i]), self.kappas[i] < 0))
        return int(key[0])


def select_best(groups: list[TrajectoryGroup], cost_map: BevCostMap,
                bias: DirectionalBias, cfg: PlannerConfig) -> PlanResult:
    """Evaluate every group and pick the cheapest safe one.

    The directional cue only biases: a group whose free length falls below
    the configured floor is never chosen no matter the bias; when no group
    clears the floor the result is blocked with zero curvature.
    """
    return RolloutEvaluator(groups, cfg).evaluate(cost_map, bias)

"""Independent slow reference renderer for cross-checking SceneRenderer.

Uses direct 3D parametric intersections (ray vs vertical quad / cylinder /
prism / ground polygon) with none of the azimuth-bin machinery of the
production renderer.
"""
import math

import numpy as np
from matplotlib.path import Path as MplPath

from guidenav.world import CircleShape


def reference_render(camera, world, state, cfg):
    h, w = camera.height_px, camera.width
    dirs = camera.pixel_directions().reshape(-1, 3)
    c, s = math.cos(state.theta), math.sin(state.theta)
    dx = c * dirs[:, 0] - s * dirs[:, 1]
    dy = s * dirs[:, 0] + c * dirs[:, 1]
    dz = dirs[:, 2]
    ox = state.x + c * camera.origin[0] - s * camera.origin[1]
    oy = state.y + s * camera.origin[0] + c * camera.origin[1]
    oz = camera.origin[2]
    hnorm = np.hypot(dx, dy)

    best_r = np.full(dirs.shape[0], np.inf)
    best_c = np.full(dirs.shape[0], cfg.wall_class, dtype=np.uint8)

    def consider(t, mask, class_id):
        r = np.where(mask, t * hnorm, np.inf)
        better = (r < best_r) & (r <= cfg.max_render_distance)
        best_r[better] = r[better]
        best_c[better] = class_id

    # floor boundary walls as vertical quads
    verts = world.floor.as_array()
    for i in range(len(verts)):
        a, b = verts[i], verts[(i + 1) % len(verts)]
        ex, ey = b - a
        nx, ny = ey, -ex
        denom = nx * dx + ny * dy
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (nx * (a[0] - ox) + ny * (a[1] - oy)) / denom
        px = ox + t * dx - a[0]
        py = oy + t * dy - a[1]
        u = (px * ex + py * ey) / (ex * ex + ey * ey)
        z = oz + t * dz
        mask = (np.abs(denom) > 1e-12) & (t > 0) & (u >= 0) & (u <= 1) \
            & (z >= 0) & (z <= cfg.wall_height)
        consider(t, mask, cfg.wall_class)

    def cylinder(cx, cy, radius, height, class_id):
        rx, ry = ox - cx, oy - cy
        a_coef = dx * dx + dy * dy
        b_coef = 2 * (rx * dx + ry * dy)
        c_coef = rx * rx + ry * ry - radius * radius
        disc = b_coef * b_coef - 4 * a_coef * c_coef
        ok = (disc > 0) & (a_coef > 1e-12)
        sq = np.sqrt(np.where(ok, disc, 0))
        t_in = (-b_coef - sq) / np.where(a_coef > 1e-12, 2 * a_coef, 1.0)
        t_out = (-b_coef + sq) / np.where(a_coef > 1e-12, 2 * a_coef, 1.0)
        # clip the [t_in, t_out] interval to the z slab [0, height]
        with np.errstate(divide="ignore", invalid="ignore"):
            tz0 = (0.0 - oz) / dz
            tz1 = (height - oz) / dz
        z_lo = np.where(dz > 0, np.maximum(t_in, 0.0), np.maximum(t_in, tz1))
        z_lo = np.where(np.abs(dz) < 1e-12, t_in, z_lo)
        z_hi = np.where(dz > 0, np.minimum(t_out, tz1), np.minimum(t_out, tz0))
        z_hi = np.where(np.abs(dz) < 1e-12,
                        np.where((oz >= 0) & (oz <= height), t_out, -np.inf), z_hi)
        t_hit = np.maximum(z_lo, 0.0)
        mask = ok & (z_hi >= t_hit) & (z_hi > 0)
        consider(t_hit, mask, class_id)

    def prism(poly, height, class_id):
        n = len(poly)
        t_lo = np.zeros(dirs.shape[0])
        t_hi = np.full(dirs.shape[0], np.inf)
        feasible = np.ones(dirs.shape[0], dtype=bool)
        for i in range(n):
            a = poly[i]
            ex, ey = poly[(i + 1) % n] - poly[i]
            nx, ny = ey, -ex
            proj_d = nx * dx + ny * dy
            proj_a = nx * (a[0] - ox) + ny * (a[1] - oy)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = proj_a / proj_d
            t_lo = np.where(proj_d < -1e-12, np.maximum(t_lo, ratio), t_lo)
            t_hi = np.where(proj_d > 1e-12, np.minimum(t_hi, ratio), t_hi)
            feasible &= (np.abs(proj_d) > 1e-12) | (proj_a >= 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            tz0 = (0.0 - oz) / dz
            tz1 = (height - oz) / dz
        ztlo = np.where(dz > 0, 0.0, tz1)
        zthi = np.where(dz > 0, tz1, tz0)
        ztlo = np.where(np.abs(dz) < 1e-12, 0.0, ztlo)
        zthi = np.where(np.abs(dz) < 1e-12,
                        np.where((oz >= 0) & (oz <= height), np.inf, -np.inf), zthi)
        lo = np.maximum(np.maximum(t_lo, ztlo), 0.0)
        hi = np.minimum(t_hi, zthi)
        mask = feasible & (hi >= lo) & (hi > 0)
        consider(lo, mask, class_id)

    for obs in world.obstacles:
        if isinstance(obs.shape, CircleShape):
            cylinder(obs.shape.cx, obs.shape.cy, obs.shape.radius, obs.height,
                     obs.class_id)
        else:
            prism(obs.shape.as_array(), obs.height, obs.class_id)
    for ped in world.pedestrians:
        if ped.active(world.t):
            px, py = ped.position
            cylinder(px, py, ped.radius, ped.height, ped.class_id)

    # ground plane, masked by the floor polygon
    with np.errstate(divide="ignore", invalid="ignore"):
        t_g = np.where(dz < 0, -oz / dz, np.inf)
    pts = np.stack([ox + t_g * dx, oy + t_g * dy], axis=-1)
    finite = np.isfinite(t_g)
    inside = np.zeros(dirs.shape[0], dtype=bool)
    inside[finite] = MplPath(world.floor.as_array()).contains_points(pts[finite])
    r_g = t_g * hnorm
    floor_hit = finite & inside & (r_g <= cfg.max_render_distance) & (r_g < best_r)

    out = best_c.copy()
    out[floor_hit] = cfg.floor_class
    return out.reshape(h, w)

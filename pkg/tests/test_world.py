import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guidenav.config import RobotConfig
from guidenav.world import (
    HandlerAttachment,
    RobotState,
    ScenarioError,
    VelocityCommand,
    check_collision,
    handler_pose,
    load_world,
    normalize_angle,
    step_robot,
    step_world,
)

from conftest import angles_close, box_obstacle, corridor_scenario


# ---------------------------------------------------------------------------
# load_world

def test_load_empty_rectangular_floor():
    world = load_world(corridor_scenario(length=20.0, width=4.0))
    assert world.obstacles == ()
    assert world.bounds == (0.0, -2.0, 20.0, 2.0)
    assert world.t == 0.0


def test_load_rejects_overspeed_pedestrian():
    scn = corridor_scenario(pedestrians=[
        {"route": [[5.0, 0.0], [15.0, 0.0]], "speed": 3.0, "radius": 0.3},
    ])
    with pytest.raises(ScenarioError, match="pedestrians\\[0\\].*speed"):
        load_world(scn)


def test_load_rejects_out_of_range_class_id():
    scn = corridor_scenario(obstacles=[box_obstacle(5.0, 0.0, class_id=150)])
    with pytest.raises(ScenarioError, match="obstacles\\[0\\].*class_id"):
        load_world(scn)


def test_load_rejects_obstacle_outside_bounds():
    scn = corridor_scenario(obstacles=[box_obstacle(25.0, 0.0)])
    scn["bounds"] = [0.0, -2.0, 20.0, 2.0]
    with pytest.raises(ScenarioError, match="obstacles\\[0\\]"):
        load_world(scn)


def test_load_rejects_self_intersecting_floor():
    scn = corridor_scenario()
    scn["floor"] = [[0, 0], [4, 4], [4, 0], [0, 4]]
    with pytest.raises(ScenarioError, match="floor"):
        load_world(scn)


def test_load_parse_error_reports_line(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "floor": [[0,0], [1,0],\n}')
    with pytest.raises(ScenarioError, match="line 3"):
        load_world(bad)


def test_shipped_hallway_a_has_declared_route_length():
    from guidenav.scenarios import resolve_scenario

    world = load_world(resolve_scenario("hallway-A"))
    assert world.route_length_m == 105.0


# ---------------------------------------------------------------------------
# step_world

def test_pedestrian_euler_step():
    scn = corridor_scenario(length=40.0, pedestrians=[
        {"route": [[5.0, 0.0], [15.0, 0.0]], "speed": 1.0, "radius": 0.3},
    ])
    world = load_world(scn)
    for _ in range(5):
        world = step_world(world, 0.1)
    px, py = world.pedestrians[0].position
    assert px == pytest.approx(5.5, abs=1e-12)
    assert py == pytest.approx(0.0, abs=1e-12)


def test_step_world_without_pedestrians_only_advances_clock():
    world = load_world(corridor_scenario())
    stepped = step_world(world, 0.05)
    assert stepped.obstacles == world.obstacles
    assert stepped.pedestrians == ()
    assert stepped.t == pytest.approx(0.05)


def test_head_on_gap_closes_at_combined_speed():
    # Closed-form oracle: gap(t) = gap0 - (v_ped + v_robot) * t.
    v_robot, v_ped, gap0 = 0.7, 1.0, 3.0
    scn = corridor_scenario(length=40.0, pedestrians=[
        {"route": [[1.0 + gap0, 0.0], [0.5, 0.0]], "speed": v_ped, "radius": 0.3},
    ])
    world = load_world(scn)
    state = RobotState(1.0, 0.0, 0.0)
    cmd = VelocityCommand(forward=v_robot)
    dt, steps = 0.01, 100
    for _ in range(steps):
        world = step_world(world, dt)
        state = step_robot(state, cmd, dt)
    expected_gap = gap0 - (v_ped + v_robot) * dt * steps
    actual_gap = world.pedestrians[0].position[0] - state.x
    assert actual_gap == pytest.approx(expected_gap, abs=1e-9)


def test_pedestrian_stops_at_route_end():
    scn = corridor_scenario(pedestrians=[
        {"route": [[5.0, 0.0], [6.0, 0.0]], "speed": 2.0, "radius": 0.3},
    ])
    world = load_world(scn)
    for _ in range(20):
        world = step_world(world, 0.1)
    assert world.pedestrians[0].position == (6.0, 0.0)
    assert world.pedestrians[0].velocity == (0.0, 0.0)


def test_step_world_rejects_bad_dt():
    world = load_world(corridor_scenario())
    with pytest.raises(ValueError):
        step_world(world, 0.0)
    with pytest.raises(ValueError):
        step_world(world, 0.2)


# ---------------------------------------------------------------------------
# step_robot

def _integrate_unicycle_reference(v, kappa, duration, dt=1e-4):
    # Independent oracle: explicit Euler on the unicycle ODE at a tiny step.
    x = y = 0.0
    theta = 0.0
    steps = int(round(duration / dt))
    for _ in range(steps):
        x += v * math.cos(theta) * dt
        y += v * math.sin(theta) * dt
        theta -= v * kappa * dt
    return x, y, theta


def test_straight_line_step():
    state = step_robot(RobotState(0, 0, 0), VelocityCommand(forward=0.7), dt=0.1)
    total = state
    for _ in range(9):
        total = step_robot(total, VelocityCommand(forward=0.7), dt=0.1)
    assert total.x == pytest.approx(0.7, abs=1e-12)
    assert total.y == pytest.approx(0.0, abs=1e-12)
    assert total.theta == pytest.approx(0.0, abs=1e-12)


def test_quarter_circle_matches_ode_oracle():
    v, kappa = 0.5, 2.0
    duration = (math.pi / 2) / (v * kappa)  # heading change of pi/2
    ref = _integrate_unicycle_reference(v, kappa, duration)
    state = RobotState(0, 0, 0)
    cmd = VelocityCommand(forward=v, curvature=kappa)
    n = 100
    for _ in range(n):
        state = step_robot(state, cmd, dt=duration / n, robot=RobotConfig(kappa_limit=2.0))
    assert abs(state.theta - (-math.pi / 2)) < 1e-9
    assert state.x == pytest.approx(ref[0], abs=1e-3)
    assert state.y == pytest.approx(ref[1], abs=1e-3)
    assert angles_close(state.theta, ref[2], tol=1e-3)


def test_pure_lateral_step():
    state = step_robot(RobotState(0, 0, 0), VelocityCommand(lateral=0.2), dt=0.1)
    for _ in range(9):
        state = step_robot(state, VelocityCommand(lateral=0.2), dt=0.1)
    assert state.x == pytest.approx(0.0, abs=1e-12)
    assert state.y == pytest.approx(-0.2, abs=1e-12)  # + lateral moves right (-y)
    assert state.theta == 0.0


def test_command_clamped_to_limits():
    robot = RobotConfig()
    state = step_robot(RobotState(0, 0, 0), VelocityCommand(forward=5.0), dt=0.1, robot=robot)
    assert state.forward_speed == robot.v_limit


def test_displacement_equals_vt_for_straight_runs():
    v, dt, n = 0.9, 0.01, 1000
    state = RobotState(2.0, -1.0, 0.77)
    for _ in range(n):
        state = step_robot(state, VelocityCommand(forward=v), dt)
    dist = math.hypot(state.x - 2.0, state.y + 1.0)
    assert abs(dist - v * dt * n) / (v * dt * n) < 1e-9


def test_arc_stays_on_circle():
    # For constant (v, kappa) the robot must remain on the initial tangent circle.
    v, kappa = 0.7, 1.2
    state = RobotState(0.3, 0.4, 0.6)
    # circle center is 1/kappa to the right of the heading for kappa > 0
    cx = state.x + math.sin(state.theta) / kappa
    cy = state.y - math.cos(state.theta) / kappa
    radius = 1.0 / kappa
    cmd = VelocityCommand(forward=v, curvature=kappa)
    for _ in range(5000):
        state = step_robot(state, cmd, dt=0.01)
        err = abs(math.hypot(state.x - cx, state.y - cy) - radius)
        assert err < 1e-6


@given(theta=st.floats(-10, 10))
def test_normalize_angle_range(theta):
    a = normalize_angle(theta)
    assert -math.pi < a <= math.pi
    assert angles_close(a, theta)


# ---------------------------------------------------------------------------
# handler_pose

def test_handler_pose_axis_aligned():
    attach = HandlerAttachment("left", 0.5, -0.3, 0.25)
    assert handler_pose(RobotState(0, 0, 0), attach) == pytest.approx((-0.3, 0.5))


def test_handler_pose_mirrors_for_right_side():
    attach = HandlerAttachment("right", 0.5, -0.3, 0.25)
    assert handler_pose(RobotState(0, 0, 0), attach) == pytest.approx((-0.3, -0.5))


def test_handler_pose_rotates_with_heading():
    # Rotation-matrix oracle applied to the local offset vector.
    attach = HandlerAttachment("left", 0.5, -0.3, 0.25)
    theta = math.pi / 2
    local = np.array([-0.3, 0.5])
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    expected = rot @ local
    got = handler_pose(RobotState(0, 0, theta), attach)
    assert got == pytest.approx(tuple(expected), abs=1e-12)


@given(
    x=st.floats(-5, 5), y=st.floats(-5, 5), theta=st.floats(-math.pi, math.pi),
)
@settings(max_examples=50)
def test_handler_rigidity(x, y, theta):
    attach = HandlerAttachment("left", 0.55, -0.30, 0.25)
    hx, hy = handler_pose(RobotState(x, y, theta), attach)
    dist = math.hypot(hx - x, hy - y)
    assert dist == pytest.approx(math.hypot(0.55, 0.30), abs=1e-12)


# ---------------------------------------------------------------------------
# check_collision

def test_empty_world_clearance_is_distance_to_walls():
    world = load_world(corridor_scenario(length=20.0, width=4.0))
    state = RobotState(10.0, 0.0, 0.0)
    attach = HandlerAttachment("left", 0.55, -0.30, 0.25)
    report = check_collision(world, state, attach)
    assert not report.robot_hit and not report.handler_hit
    # handler disc is nearest: its edge sits at y = 0.55 + 0.25 from the wall at 2.0
    assert report.min_clearance == pytest.approx(2.0 - 0.80, abs=1e-9)


def test_overlapping_obstacle_hits_robot():
    world = load_world(corridor_scenario(obstacles=[box_obstacle(10.0, 0.0, size=0.6)]))
    report = check_collision(world, RobotState(10.0, 0.0, 0.0),
                             HandlerAttachment("left", 0.55, -0.3, 0.25))
    assert report.robot_hit
    assert report.min_clearance == 0.0
    assert report.contact_entity == "obs0"


def test_handler_gap_against_point_sampling_oracle():
    # Obstacle edge 0.35 m from the handler disc edge = clearance 0.10.
    attach = HandlerAttachment("left", 0.55, -0.30, 0.25)
    state = RobotState(10.0, 0.0, 0.0)
    hx, hy = handler_pose(state, attach)   # (9.7, 0.55)
    edge_y = hy + attach.footprint_radius + 0.10
    size = 0.4
    world = load_world(corridor_scenario(
        width=4.4,
        obstacles=[box_obstacle(hx, edge_y + size / 2, size=size)],
    ))
    report = check_collision(world, state, attach)
    assert not report.handler_hit

    # Dense point-sampling oracle over the obstacle boundary.
    obstacle = world.obstacles[0].shape.as_array()
    best = math.inf
    for i in range(len(obstacle)):
        a, b = obstacle[i], obstacle[(i + 1) % len(obstacle)]
        for t in np.linspace(0, 1, 4000):
            p = a + t * (b - a)
            best = min(best, math.hypot(p[0] - hx, p[1] - hy) - attach.footprint_radius)
    assert best == pytest.approx(0.10, abs=1e-6)
    assert report.min_clearance <= best + 1e-9  # other entities may be closer


def test_robot_outside_floor_counts_as_wall_hit():
    world = load_world(corridor_scenario(width=4.0))
    report = check_collision(world, RobotState(10.0, 1.95, 0.0),
                             HandlerAttachment("left", 0.55, -0.3, 0.25))
    assert report.handler_hit  # handler disc is pushed through the wall
    assert report.contact_entity == "wall"
    assert report.min_clearance == 0.0


def test_pedestrian_not_spawned_is_ignored():
    scn = corridor_scenario(pedestrians=[
        {"route": [[10.0, 0.0], [10.0, 0.0]], "speed": 0.0, "radius": 0.3, "spawn_t": 5.0},
    ])
    world = load_world(scn)
    report = check_collision(world, RobotState(10.0, 0.0, 0.0),
                             HandlerAttachment("left", 0.55, -0.3, 0.25))
    assert not report.robot_hit
    world = step_world(world, 0.1)
    world = world.__class__(**{**world.__dict__, "t": 6.0})
    report = check_collision(world, RobotState(10.0, 0.0, 0.0),
                             HandlerAttachment("left", 0.55, -0.3, 0.25))
    assert report.robot_hit


# ---------------------------------------------------------------------------
# determinism & containment properties

def test_world_stepping_is_bitwise_deterministic():
    scn = corridor_scenario(length=40.0, pedestrians=[
        {"route": [[5.0, -1.0], [30.0, 1.0], [35.0, 0.0]], "speed": 1.3, "radius": 0.3},
    ])
    def run():
        world = load_world(scn)
        trace = []
        for _ in range(500):
            world = step_world(world, 0.01)
            trace.append(world.pedestrians[0].position)
        return trace

    assert run() == run()


@given(seed=st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_pedestrians_stay_in_bounds(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform([0.5, -1.5], [19.5, 1.5], size=(4, 2)).tolist()
    scn = corridor_scenario(pedestrians=[
        {"route": pts, "speed": float(rng.uniform(0.2, 2.0)), "radius": 0.25},
    ])
    world = load_world(scn)
    xmin, ymin, xmax, ymax = world.bounds
    for _ in range(300):
        world = step_world(world, 0.05)
        px, py = world.pedestrians[0].position
        assert xmin <= px <= xmax and ymin <= py <= ymax

"""guidenav: guide-dog-style indoor navigation — simulator, semantic-costmap
local planner, rule-based safety stops and a handler button interface."""

from .config import AppConfig, ConfigError, config_from_dict, load_config
from .world import (
    CollisionReport,
    HandlerAttachment,
    PedestrianAgent,
    RobotState,
    ScenarioError,
    VelocityCommand,
    WorldModel,
    check_collision,
    handler_pose,
    load_world,
    step_robot,
    step_world,
)

__all__ = [
    "AppConfig",
    "ConfigError",
    "config_from_dict",
    "load_config",
    "CollisionReport",
    "HandlerAttachment",
    "PedestrianAgent",
    "RobotState",
    "ScenarioError",
    "VelocityCommand",
    "WorldModel",
    "check_collision",
    "handler_pose",
    "load_world",
    "step_robot",
    "step_world",
]

__version__ = "0.1.0"

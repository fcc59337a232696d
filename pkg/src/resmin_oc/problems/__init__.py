"""Bundled benchmark problems: the linear testing oracle plus the two
nonlinear benchmarks (minimum-time robot arm, windshear go-around)."""

from .linear import linear_problem
from .robot_arm import RobotArmParams, load_robot_arm_params, two_link_robot_arm
from .windshear import WindshearParams, load_windshear_params, windshear_problem

__all__ = [
    "linear_problem",
    "RobotArmParams",
    "load_robot_arm_params",
    "two_link_robot_arm",
    "WindshearParams",
    "load_windshear_params",
    "windshear_problem",
]

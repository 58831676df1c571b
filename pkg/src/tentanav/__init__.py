"""Map-free 3D reactive navigation by tentacle sampling.

A precomputed bank of straight sampling rays ("tentacles") fixed to the
robot frame is scored each cycle against a robot-centered occupancy grid
refilled from recent scans; the cheapest navigable tentacle yields the
next velocity-clamped pose command. Ships with a deterministic kinematic
simulator and a benchmark harness.
"""

from tentanav.params import (
    ConfigError,
    OfflineParams,
    OnlineParams,
    RobotParams,
    load_config,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "OfflineParams",
    "OnlineParams",
    "RobotParams",
    "load_config",
    "__version__",
]

"""Parameter groups and configuration loading.

Three groups, mirrored by the JSON config schema: ``robot`` (bounding box,
speed limits, sensor envelope), ``offline`` (grid and tentacle-bank shape,
fixed before navigation starts) and ``online`` (selection weights and
thresholds, replaceable between navigation cycles but never mutated inside
one).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Config file is malformed or violates a parameter invariant."""


@dataclass(frozen=True)
class RobotParams:
    """Robot bounding box, kinematic limits and sensor envelope.

    ``sensor_range`` is the per-axis (x, y, z) reach of the occupancy
    sensor in the robot frame; it bounds how long tentacles may be.
    """

    width: float = 0.5
    length: float = 0.5
    height: float = 0.25
    max_lateral_speed: float = 1.0
    max_yaw_rate: float = math.pi / 2
    max_pitch_rate: float = math.pi / 4
    max_roll_rate: float = math.pi / 4
    sensor_resolution: float = 0.15
    sensor_range: tuple[float, float, float] = (10.0, 10.0, 10.0)

    def validate(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            parts = value if isinstance(value, tuple) else (value,)
            for part in parts:
                if not part > 0:
                    raise ConfigError(
                        f"robot.{f.name} must be strictly positive, got {value!r}"
                    )


@dataclass(frozen=True)
class OfflineParams:
    """Grid and tentacle-bank geometry, adjusted only before navigation.

    Defaults give the full-scale 31 x 21 = 651 tentacle bank over a
    0.2 m-voxel grid; see ``benchmark_offline()`` for the lighter layout
    used by the benchmark suite.
    """

    voxel_dim: float = 0.2
    grid_voxels: tuple[int, int, int] = (110, 110, 50)
    yaw_tentacles: int = 31
    pitch_tentacles: int = 21
    samples_per_tentacle: int = 30
    tentacle_length: float = 10.0
    yaw_coverage: float = math.radians(60.0)
    pitch_coverage: float = math.radians(45.0)
    priority_distance: float = 0.4
    support_distance: float = 1.0
    max_occupancy_weight: float = 1.0
    occupancy_weight_scale: float = 10.0

    def validate(self) -> None:
        if not self.voxel_dim > 0:
            raise ConfigError("offline.voxel_dim must be strictly positive")
        if len(self.grid_voxels) != 3 or any(
            not isinstance(n, int) or n < 1 for n in self.grid_voxels
        ):
            raise ConfigError("offline.grid_voxels must be three positive integers")
        if self.yaw_tentacles < 1 or self.pitch_tentacles < 1:
            raise ConfigError("offline tentacle counts must be >= 1")
        if self.samples_per_tentacle < 2:
            raise ConfigError("offline.samples_per_tentacle must be >= 2")
        if not self.tentacle_length > 0:
            raise ConfigError("offline.tentacle_length must be strictly positive")
        if self.yaw_coverage < 0 or self.pitch_coverage < 0:
            raise ConfigError("offline coverage angles must be non-negative")
        if not self.priority_distance > 0:
            raise ConfigError("offline.priority_distance must be strictly positive")
        if not self.support_distance > self.priority_distance:
            raise ConfigError(
                "offline.support_distance must exceed offline.priority_distance"
            )
        if not self.max_occupancy_weight > 0:
            raise ConfigError("offline.max_occupancy_weight must be strictly positive")
        if not self.occupancy_weight_scale > 0:
            raise ConfigError("offline.occupancy_weight_scale must be strictly positive")
        # Support weights are max_occupancy_weight / (scale * distance) with
        # distance >= priority_distance; this keeps every one of them strictly
        # below the priority weight.
        if self.occupancy_weight_scale * self.priority_distance < 1.0:
            raise ConfigError(
                "offline.occupancy_weight_scale * offline.priority_distance must be"
                " >= 1 so support weights stay below max_occupancy_weight"
            )

    def validate_against(self, robot: RobotParams) -> None:
        if self.tentacle_length > min(robot.sensor_range):
            raise ConfigError(
                "offline.tentacle_length must not exceed the smallest robot.sensor_range"
            )

    @property
    def tentacle_count(self) -> int:
        return self.yaw_tentacles * self.pitch_tentacles


@dataclass(frozen=True)
class OnlineParams:
    """Selection weights and thresholds, tunable between cycles.

    ``crash_distance_scale`` divides the tentacle length to give the crash
    distance; it must exceed 1 so the crash distance falls strictly inside
    the tentacle. The four weights blend clearance, nearby clutter, goal
    closeness and transition smoothness into the scalar cost.
    """

    crash_distance_scale: float = 5.0
    clearance_weight: float = 2.0
    clutter_weight: float = 1.0
    closeness_weight: float = 4.0
    smoothness_weight: float = 0.5
    occupancy_error_threshold: int = 0
    history_depth: int = 5

    def validate(self) -> None:
        if not self.crash_distance_scale > 1:
            raise ConfigError(
                "online.crash_distance_scale must exceed 1 so the crash distance"
                " falls inside the tentacle"
            )
        weights = (
            self.clearance_weight,
            self.clutter_weight,
            self.closeness_weight,
            self.smoothness_weight,
        )
        if any(w < 0 for w in weights):
            raise ConfigError("online weights must be non-negative")
        if not any(w > 0 for w in weights):
            raise ConfigError("at least one online weight must be strictly positive")
        if self.occupancy_error_threshold < 0:
            raise ConfigError("online.occupancy_error_threshold must be >= 0")
        if self.history_depth < 0:
            raise ConfigError("online.history_depth must be >= 0")


_TUPLE_FIELDS = {"sensor_range": float, "grid_voxels": int}
_INT_FIELDS = {
    "grid_voxels",
    "yaw_tentacles",
    "pitch_tentacles",
    "samples_per_tentacle",
    "occupancy_error_threshold",
    "history_depth",
}


def _coerce(section: str, name: str, value: Any) -> Any:
    if name in _TUPLE_FIELDS:
        if not isinstance(value, (list, tuple)) or len(value) != 3:
            raise ConfigError(f"{section}.{name} must be a 3-element list")
        return tuple(_coerce_scalar(section, name, v, _TUPLE_FIELDS[name]) for v in value)
    kind = int if name in _INT_FIELDS else float
    return _coerce_scalar(section, name, value, kind)


def _coerce_scalar(section: str, name: str, value: Any, kind: type) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{name} must be a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise ConfigError(f"{section}.{name} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def _build(cls, section: str, data: Any):
    if not isinstance(data, dict):
        raise ConfigError(f"config section {section!r} must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in {section!r}: {sorted(unknown)}")
    kwargs = {name: _coerce(section, name, value) for name, value in data.items()}
    return cls(**kwargs)


def load_config(path: str | Path) -> tuple[RobotParams, OfflineParams, OnlineParams]:
    """Load and validate a JSON config; absent fields take defaults.

    Raises ConfigError for parse failures, unknown keys and any violated
    invariant; the message names the offending field.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(raw) - {"robot", "offline", "online"}
    if unknown:
        raise ConfigError(f"unknown top-level config section(s): {sorted(unknown)}")
    robot = _build(RobotParams, "robot", raw.get("robot", {}))
    offline = _build(OfflineParams, "offline", raw.get("offline", {}))
    online = _build(OnlineParams, "online", raw.get("online", {}))
    robot.validate()
    offline.validate()
    online.validate()
    offline.validate_against(robot)
    return robot, offline, online


def default_params() -> tuple[RobotParams, OfflineParams, OnlineParams]:
    """Full-scale defaults: 651-tentacle bank, 0.2 m voxels, 10 m reach."""
    return RobotParams(), OfflineParams(), OnlineParams()


def benchmark_offline() -> OfflineParams:
    """Desk-scale offline layout used by the benchmark suite (189 tentacles)."""
    return OfflineParams(
        grid_voxels=(60, 60, 30),
        yaw_tentacles=21,
        pitch_tentacles=9,
        samples_per_tentacle=15,
        tentacle_length=5.0,
        pitch_coverage=math.radians(20.0),
    )


def benchmark_params() -> tuple[RobotParams, OfflineParams, OnlineParams]:
    """Robot/offline/online trio used by the built-in benchmark scenarios.

    The online weights were tuned on the cylinder and forest maps; see
    configs/benchmark.json for the same values in config-file form.
    """
    robot = RobotParams(sensor_range=(6.0, 6.0, 5.0))
    online = OnlineParams(
        crash_distance_scale=5.0,
        clearance_weight=4.0,
        clutter_weight=2.0,
        closeness_weight=4.0,
        smoothness_weight=0.5,
    )
    return robot, benchmark_offline(), online

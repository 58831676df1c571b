"""Deterministic world model: procedural maps, synthetic depth sensing,
collision checks.

Worlds hold vertical cylinders (trees, pillars) and axis-aligned boxes.
The sensor casts a ray fan over its field of view and returns the nearest
surface hit per ray as a sensor-frame point cloud; everything is a pure
function of (world, sensor, pose, noise seed). No ground plane is sensed
or collided.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from tentanav.grid import PointCloud
from tentanav.params import RobotParams
from tentanav.transforms import RigidTransform

_EPS = 1e-9


class MapError(ValueError):
    """Raised when procedural placement cannot satisfy the request."""


@dataclass(frozen=True)
class Cylinder:
    """Vertical cylinder: lateral surface plus top/bottom caps."""

    x: float
    y: float
    radius: float
    z0: float
    z1: float


@dataclass(frozen=True)
class Box:
    """Axis-aligned box."""

    center: tuple[float, float, float]
    half_extents: tuple[float, float, float]


@dataclass(frozen=True)
class WorldMap:
    """Obstacle set inside rectangular bounds (xmin, xmax, ymin, ymax)."""

    bounds: tuple[float, float, float, float]
    seed: int
    obstacles: tuple = ()
    kind: str = "custom"

    def to_dict(self) -> dict:
        obs = []
        for ob in self.obstacles:
            if isinstance(ob, Cylinder):
                obs.append(
                    {
                        "type": "cylinder",
                        "center": [ob.x, ob.y],
                        "radius": ob.radius,
                        "z": [ob.z0, ob.z1],
                    }
                )
            else:
                obs.append(
                    {
                        "type": "box",
                        "center": list(ob.center),
                        "half_extents": list(ob.half_extents),
                    }
                )
        return {
            "kind": self.kind,
            "seed": self.seed,
            "bounds": {"x": [self.bounds[0], self.bounds[1]], "y": [self.bounds[2], self.bounds[3]]},
            "obstacles": obs,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WorldMap":
        obstacles = []
        for ob in data.get("obstacles", []):
            if ob["type"] == "cylinder":
                obstacles.append(
                    Cylinder(
                        x=float(ob["center"][0]),
                        y=float(ob["center"][1]),
                        radius=float(ob["radius"]),
                        z0=float(ob["z"][0]),
                        z1=float(ob["z"][1]),
                    )
                )
            elif ob["type"] == "box":
                obstacles.append(
                    Box(
                        center=tuple(float(v) for v in ob["center"]),
                        half_extents=tuple(float(v) for v in ob["half_extents"]),
                    )
                )
            else:
                raise MapError(f"unknown obstacle type {ob['type']!r}")
        bx = data["bounds"]["x"]
        by = data["bounds"]["y"]
        return cls(
            bounds=(float(bx[0]), float(bx[1]), float(by[0]), float(by[1])),
            seed=int(data.get("seed", 0)),
            obstacles=tuple(obstacles),
            kind=str(data.get("kind", "custom")),
        )


def save_map(world: WorldMap, path: str | Path) -> None:
    Path(path).write_text(json.dumps(world.to_dict(), indent=2) + "\n")


def load_map(path: str | Path) -> WorldMap:
    try:
        return WorldMap.from_dict(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise MapError(f"cannot load map {path}: {exc}") from exc


def generate_map(
    kind: str,
    seed: int,
    bounds: tuple[float, float, float, float],
    density: float = 0.2,
    *,
    count: int = 12,
    keep_clear: Sequence[tuple[float, float, float]] = (),
    obstacle_height: float | None = None,
) -> WorldMap:
    """Procedural obstacle map.

    ``forest`` places round(density * area) trees (radius drawn per seed
    from [0.10, 0.25] m) by rejection sampling with a minimum spacing;
    ``cylinders`` places ``count`` thicker pillars. ``keep_clear`` disks
    (x, y, radius) stay obstacle-free for start/goal placement.
    """
    if density < 0:
        raise MapError("density must be non-negative")
    xmin, xmax, ymin, ymax = bounds
    if not (xmax > xmin and ymax > ymin):
        raise MapError("bounds must span a positive area")
    rng = np.random.default_rng(seed)
    if kind == "forest":
        area = (xmax - xmin) * (ymax - ymin)
        target = int(round(density * area))
        radius_range = (0.10, 0.25)
        min_spacing = 1.5
        height = 4.0 if obstacle_height is None else obstacle_height
    elif kind == "cylinders":
        target = count
        radius_range = (0.4, 0.8)
        min_spacing = 3.0
        height = 8.0 if obstacle_height is None else obstacle_height
    else:
        raise MapError(f"unknown map kind {kind!r}")

    placed: list[Cylinder] = []
    attempts = 0
    max_attempts = 300 * max(target, 1)
    while len(placed) < target and attempts < max_attempts:
        attempts += 1
        radius = float(rng.uniform(*radius_range))
        x = float(rng.uniform(xmin + radius, xmax - radius))
        y = float(rng.uniform(ymin + radius, ymax - radius))
        if any(math.hypot(x - c.x, y - c.y) < min_spacing for c in placed):
            continue
        if any(
            math.hypot(x - cx, y - cy) < cr + radius for cx, cy, cr in keep_clear
        ):
            continue
        placed.append(Cylinder(x=x, y=y, radius=radius, z0=0.0, z1=height))
    # one short of target is acceptable; beyond that the density is infeasible
    if len(placed) < target - 1:
        raise MapError(
            f"placed only {len(placed)}/{target} obstacles after {attempts} attempts"
        )
    return WorldMap(bounds=bounds, seed=seed, obstacles=tuple(placed), kind=kind)


@dataclass(frozen=True)
class SensorModel:
    """Ray-fan depth sensor: per-axis range caps, FOV, angular resolution."""

    range: tuple[float, float, float] = (10.0, 10.0, 10.0)
    fov_horizontal: float = math.radians(90.0)
    fov_vertical: float = math.radians(60.0)
    angular_resolution: float = math.radians(1.5)
    min_range: float = 0.3
    belief: float = 1.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.min_range >= min(self.range):
            raise ValueError("sensor min_range must be below max range")
        if self.angular_resolution <= 0:
            raise ValueError("sensor angular_resolution must be positive")

    @classmethod
    def from_params(cls, robot: RobotParams, **overrides) -> "SensorModel":
        kwargs = {"range": robot.sensor_range}
        kwargs.update(overrides)
        return cls(**kwargs)

    def ray_directions(self) -> np.ndarray:
        """Unit ray directions in the sensor frame (+x forward), (R, 3)."""
        n_az = int(math.floor(self.fov_horizontal / self.angular_resolution + 1e-9)) + 1
        n_el = int(math.floor(self.fov_vertical / self.angular_resolution + 1e-9)) + 1
        az = np.linspace(-self.fov_horizontal / 2.0, self.fov_horizontal / 2.0, n_az)
        el = np.linspace(-self.fov_vertical / 2.0, self.fov_vertical / 2.0, n_el)
        azg, elg = np.meshgrid(az, el, indexing="ij")
        cos_el = np.cos(elg)
        dirs = np.stack(
            [cos_el * np.cos(azg), cos_el * np.sin(azg), np.sin(elg)], axis=-1
        )
        return dirs.reshape(-1, 3)


def _cylinder_hits(origin, dirs, cyl: Cylinder, t_max: float) -> np.ndarray:
    """Nearest valid hit distance per ray against one cylinder (inf = miss)."""
    n = dirs.shape[0]
    best = np.full(n, np.inf)
    ox, oy, oz = origin
    dx = dirs[:, 0]
    dy = dirs[:, 1]
    dz = dirs[:, 2]
    # lateral surface: quadratic in the xy projection
    a = dx * dx + dy * dy
    fx = ox - cyl.x
    fy = oy - cyl.y
    b = 2.0 * (fx * dx + fy * dy)
    c = fx * fx + fy * fy - cyl.radius * cyl.radius
    disc = b * b - 4.0 * a * c
    valid = (disc >= 0.0) & (a > _EPS)
    sq = np.sqrt(np.where(valid, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        for root in ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)):
            t = np.where(valid, root, np.inf)
            z = oz + t * dz
            ok = (t > _EPS) & (t <= t_max) & (z >= cyl.z0) & (z <= cyl.z1)
            best = np.where(ok & (t < best), t, best)
        # caps: plane intersections inside the radius
        for z_plane in (cyl.z0, cyl.z1):
            t = np.where(np.abs(dz) > _EPS, (z_plane - oz) / dz, np.inf)
            px = ox + t * dx - cyl.x
            py = oy + t * dy - cyl.y
            ok = (
                (t > _EPS)
                & (t <= t_max)
                & (px * px + py * py <= cyl.radius * cyl.radius)
            )
            best = np.where(ok & (t < best), t, best)
    return best


def _box_hits(origin, dirs, box: Box, t_max: float) -> np.ndarray:
    """Nearest valid hit distance per ray against one axis-aligned box."""
    lo = np.asarray(box.center) - np.asarray(box.half_extents)
    hi = np.asarray(box.center) + np.asarray(box.half_extents)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(np.abs(dirs) > _EPS, 1.0 / dirs, np.inf)
        t1 = (lo[None, :] - origin[None, :]) * inv
        t2 = (hi[None, :] - origin[None, :]) * inv
        # rays parallel to a slab: inside it -> no constraint, outside -> miss
        parallel = np.abs(dirs) <= _EPS
        inside = (origin[None, :] >= lo[None, :]) & (origin[None, :] <= hi[None, :])
        t_lo = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
        t_hi = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
    t_near = t_lo.max(axis=1)
    t_far = t_hi.min(axis=1)
    hit = (t_far >= np.maximum(t_near, _EPS)) & (t_near <= t_max)
    t = np.where(t_near > _EPS, t_near, t_far)  # origin inside -> exit face
    return np.where(hit & (t > _EPS) & (t <= t_max), t, np.inf)


def sense(
    world: WorldMap,
    sensor: SensorModel,
    pose: RigidTransform,
    rng: np.random.Generator | None = None,
    timestamp: float = 0.0,
) -> PointCloud:
    """Cast the sensor's ray fan from ``pose``; nearest hit per ray.

    Points are returned in the sensor frame with the configured belief;
    optional Gaussian range noise uses ``rng``. Points inside the blind
    zone (min_range) or beyond any per-axis range cap are dropped.
    """
    dirs_local = sensor.ray_directions()
    rotation = pose.rotation
    dirs_world = dirs_local @ rotation.T
    origin = pose.translation
    t_max = float(np.linalg.norm(sensor.range))
    t_best = np.full(dirs_world.shape[0], np.inf)
    for obstacle in world.obstacles:
        if isinstance(obstacle, Cylinder):
            t = _cylinder_hits(origin, dirs_world, obstacle, t_max)
        else:
            t = _box_hits(origin, dirs_world, obstacle, t_max)
        t_best = np.minimum(t_best, t)
    hit = np.isfinite(t_best)
    if not hit.any():
        return PointCloud(
            np.empty((0, 3)), np.empty(0), sensor_pose=pose, timestamp=timestamp
        )
    t_hit = t_best[hit]
    if sensor.noise_sigma > 0.0:
        if rng is None:
            raise ValueError("noise_sigma > 0 requires an rng")
        t_hit = t_hit + rng.normal(0.0, sensor.noise_sigma, t_hit.shape)
    points_local = dirs_local[hit] * t_hit[:, None]
    keep = (
        (t_hit >= sensor.min_range)
        & (np.abs(points_local[:, 0]) <= sensor.range[0])
        & (np.abs(points_local[:, 1]) <= sensor.range[1])
        & (np.abs(points_local[:, 2]) <= sensor.range[2])
    )
    points_local = points_local[keep]
    beliefs = np.full(points_local.shape[0], sensor.belief)
    return PointCloud(points_local, beliefs, sensor_pose=pose, timestamp=timestamp)


def collides(
    world: WorldMap, position, yaw: float, robot: RobotParams
) -> bool:
    """True when the yaw-aligned robot bounding box intersects an obstacle."""
    px, py, pz = float(position[0]), float(position[1]), float(position[2])
    half_l = robot.length / 2.0
    half_w = robot.width / 2.0
    half_h = robot.height / 2.0
    cos_y = math.cos(yaw)
    sin_y = math.sin(yaw)
    for obstacle in world.obstacles:
        if isinstance(obstacle, Cylinder):
            if pz + half_h < obstacle.z0 or pz - half_h > obstacle.z1:
                continue
            # circle vs oriented rectangle in the plane
            rx = obstacle.x - px
            ry = obstacle.y - py
            local_x = cos_y * rx + sin_y * ry
            local_y = -sin_y * rx + cos_y * ry
            qx = min(max(local_x, -half_l), half_l)
            qy = min(max(local_y, -half_w), half_w)
            if (local_x - qx) ** 2 + (local_y - qy) ** 2 < obstacle.radius**2:
                return True
        else:
            cx, cy, cz = obstacle.center
            hx, hy, hz = obstacle.half_extents
            if pz + half_h < cz - hz or pz - half_h > cz + hz:
                continue
            if _obb_aabb_overlap(
                (px, py), (half_l, half_w), (cos_y, sin_y), (cx, cy), (hx, hy)
            ):
                return True
    return False


def _obb_aabb_overlap(center_a, half_a, yaw_cs, center_b, half_b) -> bool:
    """2D separating-axis test: yaw-oriented rect A vs axis-aligned rect B."""
    cos_y, sin_y = yaw_cs
    ux = (cos_y, sin_y)
    uy = (-sin_y, cos_y)
    dx = center_b[0] - center_a[0]
    dy = center_b[1] - center_a[1]
    for ax, ay in ((1.0, 0.0), (0.0, 1.0), ux, uy):
        ra = half_a[0] * abs(ax * ux[0] + ay * ux[1]) + half_a[1] * abs(
            ax * uy[0] + ay * uy[1]
        )
        rb = half_b[0] * abs(ax) + half_b[1] * abs(ay)
        if abs(ax * dx + ay * dy) > ra + rb:
            return False
    return True

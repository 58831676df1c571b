"""Robot-centered occupancy grid over a linear voxel array.

Each cycle the grid is cleared and refilled from the buffered point-cloud
history, so it stays rigidly attached to the robot frame; every voxel
stores the arithmetic mean of the belief values that landed in it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from tentanav import kernels
from tentanav.params import OfflineParams
from tentanav.transforms import RigidTransform


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the robot-centered voxel grid.

    Cell (i, j, k) spans [(i - nx//2) * voxel_dim, (i - nx//2 + 1) *
    voxel_dim) along x (likewise y, z), so the robot sits at the grid's
    volumetric center. Linear index o = i + j*nx + k*nx*ny.
    """

    counts: tuple[int, int, int]
    voxel_dim: float

    @classmethod
    def from_params(cls, offline: OfflineParams) -> "GridSpec":
        return cls(tuple(offline.grid_voxels), offline.voxel_dim)

    @property
    def n_cells(self) -> int:
        nx, ny, nz = self.counts
        return nx * ny * nz

    @property
    def extents(self) -> tuple[float, float, float]:
        return tuple(n * self.voxel_dim for n in self.counts)

    def linearize(self, point) -> int | None:
        """Linear index of the voxel containing a robot-frame point, or None
        when the point falls outside the grid."""
        nx, ny, nz = self.counts
        cells = []
        for coord, n in zip(point, self.counts):
            c = n // 2 + math.floor(coord / self.voxel_dim)
            if c < 0 or c >= n:
                return None
            cells.append(c)
        return cells[0] + cells[1] * nx + cells[2] * nx * ny

    def delinearize(self, index: int) -> np.ndarray:
        """Robot-frame center of voxel ``index``."""
        nx, ny, nz = self.counts
        if not 0 <= index < self.n_cells:
            raise IndexError(f"voxel index {index} out of range [0, {self.n_cells})")
        i = index % nx
        j = (index // nx) % ny
        k = index // (nx * ny)
        return np.array(
            [
                (i - nx // 2 + 0.5) * self.voxel_dim,
                (j - ny // 2 + 0.5) * self.voxel_dim,
                (k - nz // 2 + 0.5) * self.voxel_dim,
            ]
        )

    def cell_centers(self, indices) -> np.ndarray:
        """Vectorized ``delinearize`` for an array of indices."""
        idx = np.asarray(indices, dtype=np.int64)
        nx, ny, nz = self.counts
        i = idx % nx
        j = (idx // nx) % ny
        k = idx // (nx * ny)
        centers = np.stack(
            [
                (i - nx // 2 + 0.5) * self.voxel_dim,
                (j - ny // 2 + 0.5) * self.voxel_dim,
                (k - nz // 2 + 0.5) * self.voxel_dim,
            ],
            axis=-1,
        )
        return centers


@dataclass(eq=False)
class PointCloud:
    """One sensor scan: sensor-frame points with per-point belief values.

    ``sensor_pose`` is the sensor-to-world transform at capture time, kept
    so the scan can be re-projected into later robot frames.
    """

    points: np.ndarray
    beliefs: np.ndarray
    sensor_pose: RigidTransform
    timestamp: float = 0.0

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=np.float64).reshape(-1, 3)
        self.beliefs = np.ascontiguousarray(self.beliefs, dtype=np.float64).reshape(-1)
        if self.beliefs.shape[0] != self.points.shape[0]:
            raise ValueError("points and beliefs must have matching lengths")
        if self.beliefs.size and (
            self.beliefs.min() < 0.0 or self.beliefs.max() > 1.0
        ):
            raise ValueError("belief values must lie in [0, 1]")

    def __len__(self) -> int:
        return self.points.shape[0]


class OccupancyGrid:
    """Linear array of per-voxel average belief, robot-centered."""

    def __init__(self, spec: GridSpec):
        self.spec = spec
        n = spec.n_cells
        self.belief = np.zeros(n, dtype=np.float64)
        self.counts = np.zeros(n, dtype=np.int64)
        self._sums = np.zeros(n, dtype=np.float64)

    def rebuild(
        self, history: Sequence[PointCloud], robot_pose: RigidTransform
    ) -> "OccupancyGrid":
        """Clear and refill from buffered scans re-projected into the current
        robot frame; out-of-bounds points are dropped."""
        self._sums[:] = 0.0
        self.counts[:] = 0
        nx, ny, nz = self.spec.counts
        world_to_robot = robot_pose.inverse()
        for cloud in history:
            if len(cloud) == 0:
                continue
            to_robot = world_to_robot.compose(cloud.sensor_pose)
            coords = np.ascontiguousarray(cloud.points @ to_robot.rotation.T + to_robot.translation)
            kernels.accumulate_points(
                coords,
                cloud.beliefs,
                nx,
                ny,
                nz,
                self.spec.voxel_dim,
                self._sums,
                self.counts,
            )
        self.belief[:] = 0.0
        np.divide(self._sums, self.counts, out=self.belief, where=self.counts > 0)
        return self

    @property
    def occupied_count(self) -> int:
        return int(np.count_nonzero(self.belief > 0.0))

    def dump_csv(self, path: str | Path) -> None:
        """Write occupied voxels as (ix, iy, iz, belief) rows."""
        nx, ny, _ = self.spec.counts
        occupied = np.flatnonzero(self.belief > 0.0)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["ix", "iy", "iz", "belief"])
            for o in occupied:
                i = o % nx
                j = (o // nx) % ny
                k = o // (nx * ny)
                writer.writerow([i, j, k, repr(float(self.belief[o]))])

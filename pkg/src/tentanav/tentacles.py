"""Tentacle bank generation and support/priority voxel extraction.

Tentacles are straight sampling rays fixed to the robot frame, fanned
uniformly over yaw and pitch. Offline, every tentacle claims the grid
voxels near it: within the priority distance of its closest sampling
point a voxel is Priority (full occupancy weight), between priority and
support distance it is Support with a weight that decays as 1/distance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tentanav import kernels
from tentanav.grid import GridSpec
from tentanav.params import OfflineParams


class DegenerateBankError(ValueError):
    """A tentacle claimed no voxels at all (grid far smaller than bank)."""


@dataclass(frozen=True, eq=False)
class Tentacle:
    """One sampling ray. Row k-1 of ``samples`` is sample number k, at arc
    length k * length / n_samples from the robot; the origin itself is not
    a sample."""

    tid: int
    yaw: float
    pitch: float
    length: float
    samples: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def endpoint(self) -> np.ndarray:
        return self.samples[-1]

    def direction(self) -> np.ndarray:
        cp = math.cos(self.pitch)
        return np.array(
            [math.cos(self.yaw) * cp, math.sin(self.yaw) * cp, math.sin(self.pitch)]
        )


@dataclass(eq=False)
class ClassifiedVoxels:
    """Struct-of-arrays voxel set claimed by one tentacle.

    closest_sample holds 0-based rows into the tentacle's sample array
    (sample number k = row + 1); is_priority is 1 for Priority, 0 for
    Support.
    """

    cell_index: np.ndarray
    weight: np.ndarray
    closest_sample: np.ndarray
    is_priority: np.ndarray

    def __len__(self) -> int:
        return self.cell_index.shape[0]

    @property
    def total_weight(self) -> float:
        return float(self.weight.sum())


def spread_angles(count: int, coverage: float) -> np.ndarray:
    """``count`` angles spanning [-coverage/2, +coverage/2] uniformly."""
    if count == 1:
        return np.zeros(1)
    return np.linspace(-coverage / 2.0, coverage / 2.0, count)


def generate_tentacles(offline: OfflineParams) -> list[Tentacle]:
    """Build the straight-ray bank: yaw fan times pitch fan."""
    yaws = spread_angles(offline.yaw_tentacles, offline.yaw_coverage)
    pitches = spread_angles(offline.pitch_tentacles, offline.pitch_coverage)
    arc = offline.tentacle_length / offline.samples_per_tentacle
    steps = np.arange(1, offline.samples_per_tentacle + 1, dtype=np.float64) * arc
    tentacles = []
    tid = 0
    for yaw in yaws:
        for pitch in pitches:
            direction = np.array(
                [
                    math.cos(yaw) * math.cos(pitch),
                    math.sin(yaw) * math.cos(pitch),
                    math.sin(pitch),
                ]
            )
            samples = np.ascontiguousarray(steps[:, None] * direction[None, :])
            tentacles.append(
                Tentacle(
                    tid=tid,
                    yaw=float(yaw),
                    pitch=float(pitch),
                    length=offline.tentacle_length,
                    samples=samples,
                )
            )
            tid += 1
    return tentacles


def classify_voxels(
    tentacle: Tentacle, offline: OfflineParams, spec: GridSpec
) -> ClassifiedVoxels:
    """Extract the tentacle's priority/support voxels (bounding-box scan;
    results identical to a full-grid scan)."""
    nx, ny, nz = spec.counts
    cell_index, weight, closest, is_priority = kernels.classify_cells(
        tentacle.samples,
        nx,
        ny,
        nz,
        spec.voxel_dim,
        offline.priority_distance,
        offline.support_distance,
        offline.max_occupancy_weight,
        offline.occupancy_weight_scale,
    )
    return ClassifiedVoxels(cell_index, weight, closest, is_priority)


class TentacleBank:
    """All tentacles plus their classified voxels, flattened for the
    per-cycle occupancy kernel. Immutable once built."""

    def __init__(
        self,
        tentacles: list[Tentacle],
        classified: list[ClassifiedVoxels],
        spec: GridSpec,
        offline: OfflineParams,
    ):
        self.tentacles = tentacles
        self.classified = classified
        self.spec = spec
        self.offline = offline
        self.n_samples = offline.samples_per_tentacle
        self.length = offline.tentacle_length

        lengths = np.array([len(c) for c in classified], dtype=np.int64)
        self.offsets = np.zeros(len(classified) + 1, dtype=np.int64)
        np.cumsum(lengths, out=self.offsets[1:])
        self.cell_index = _concat([c.cell_index for c in classified], np.int64)
        self.weight = _concat([c.weight for c in classified], np.float64)
        self.closest_sample = _concat([c.closest_sample for c in classified], np.int32)
        self.is_priority = _concat([c.is_priority for c in classified], np.uint8)
        self.total_weight = np.array([c.total_weight for c in classified])
        if np.any(self.total_weight <= 0.0):
            bad = int(np.flatnonzero(self.total_weight <= 0.0)[0])
            raise DegenerateBankError(
                f"tentacle {bad} claimed no voxels; grid does not reach the bank"
            )
        self.endpoints = np.array([t.endpoint for t in tentacles])
        self.yaws = np.array([t.yaw for t in tentacles])
        self.pitches = np.array([t.pitch for t in tentacles])

    def __len__(self) -> int:
        return len(self.tentacles)

    @classmethod
    def build(cls, offline: OfflineParams, spec: GridSpec | None = None) -> "TentacleBank":
        spec = spec or GridSpec.from_params(offline)
        tentacles = generate_tentacles(offline)
        classified = [classify_voxels(t, offline, spec) for t in tentacles]
        return cls(tentacles, classified, spec, offline)

    def dump_jsonl(self, path: str | Path) -> None:
        """One JSON record per tentacle: geometry plus voxel-set sizes."""
        with open(path, "w") as fh:
            for tentacle, voxels in zip(self.tentacles, self.classified):
                record = {
                    "id": tentacle.tid,
                    "yaw": tentacle.yaw,
                    "pitch": tentacle.pitch,
                    "length": tentacle.length,
                    "n_priority": int(np.count_nonzero(voxels.is_priority)),
                    "n_support": int(len(voxels) - np.count_nonzero(voxels.is_priority)),
                    "samples": tentacle.samples.tolist(),
                }
                fh.write(json.dumps(record) + "\n")


def _concat(arrays, dtype):
    if not arrays:
        return np.empty(0, dtype=dtype)
    return np.ascontiguousarray(np.concatenate(arrays), dtype=dtype)

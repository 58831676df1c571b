"""Rigid transforms between world, robot and sensor frames.

Orientation is yaw-then-pitch: positive yaw turns the forward (+x) axis
toward +y, positive pitch tilts it toward +z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def yaw_pitch_matrix(yaw: float, pitch: float) -> np.ndarray:
    """Rotation matrix mapping body-frame vectors into the world frame."""
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    return np.array(
        [
            [cy * cp, -sy, -cy * sp],
            [sy * cp, cy, -sy * sp],
            [sp, 0.0, cp],
        ]
    )


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Rotation + translation; ``apply`` maps local points to the parent frame."""

    rotation: np.ndarray
    translation: np.ndarray

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_pose(cls, position, yaw: float = 0.0, pitch: float = 0.0) -> "RigidTransform":
        return cls(yaw_pitch_matrix(yaw, pitch), np.asarray(position, dtype=float))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def inverse(self) -> "RigidTransform":
        rot_t = self.rotation.T
        return RigidTransform(rot_t, -rot_t @ self.translation)

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Chain transforms: apply ``other`` first, then ``self``."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )


def wrap_angle(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi

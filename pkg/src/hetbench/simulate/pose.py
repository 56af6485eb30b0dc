"""Poses, Haar-uniform rotation sampling and ZYZ Euler angles.

Euler angles follow the RELION (rot, tilt, psi) convention. A pose rotation
``R`` maps image-frame directions into the volume frame through ``R^T``: the
projection of a volume under ``R`` is the projection along z of
``v(R^T x)``, whose spectrum is the central slice ``V(R^T k)``. In terms of
elementary right-handed rotations

    R = Rz(-psi) @ Ry(-tilt) @ Rz(-rot)

which is the matrix RELION calls ``A`` in ``Euler_angles2matrix``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GIMBAL_EPS = 1e-9


class PoseError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Pose:
    rotation: np.ndarray
    translation: np.ndarray  # (tx, ty) in pixels

    def __post_init__(self):
        R = np.array(self.rotation, dtype=np.float64)
        t = np.array(self.translation, dtype=np.float64)
        if R.shape != (3, 3) or t.shape != (2,):
            raise PoseError("rotation must be 3x3 and translation length 2")
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-9, rtol=0) or abs(np.linalg.det(R) - 1) > 1e-9:
            raise PoseError("rotation is not a proper orthonormal matrix")
        if not np.all(np.isfinite(t)):
            raise PoseError("translation must be finite")
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)


def quaternion_to_matrix(q: np.ndarray) -> np.ndarray:
    """Unit quaternion(s) (w, x, y, z) to rotation matrix/matrices."""
    q = np.asarray(q, dtype=np.float64)
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    w, x, y, z = np.moveaxis(q, -1, 0)
    R = np.stack([
        np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)], -1),
        np.stack([2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)], -1),
        np.stack([2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)], -1),
    ], -2)
    return R


def random_quaternion(rng: np.random.Generator, size=None) -> np.ndarray:
    """Shoemake's method: uniform on S^3, hence Haar-uniform rotations."""
    shape = () if size is None else (size,)
    u1, u2, u3 = rng.random((3,) + shape)
    a, b = np.sqrt(1 - u1), np.sqrt(u1)
    return np.stack([a * np.sin(2 * np.pi * u2), a * np.cos(2 * np.pi * u2),
                     b * np.sin(2 * np.pi * u3), b * np.cos(2 * np.pi * u3)], -1)


def sample_pose_uniform(rng: np.random.Generator, t_bound: float = 0.0) -> Pose:
    if t_bound < 0:
        raise PoseError("translation bound must be non-negative")
    R = quaternion_to_matrix(random_quaternion(rng))
    t = t_bound * (2 * rng.random(2) - 1)
    return Pose(R, t)


def rot_z(deg):
    a = np.radians(deg)
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


def rot_y(deg):
    a = np.radians(deg)
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0, s], [0, 1.0, 0], [-s, 0, c]])


def euler_to_matrix(rot: float, tilt: float, psi: float) -> np.ndarray:
    return rot_z(-psi) @ rot_y(-tilt) @ rot_z(-rot)


def matrix_to_euler(R: np.ndarray) -> tuple[float, float, float]:
    """Inverse of :func:`euler_to_matrix`, angles in degrees.

    Gimbal lock (tilt of 0 or 180 within 1e-9 rad): rot is set to 0 and the
    whole in-plane angle goes to psi.
    """
    M = np.asarray(R, dtype=np.float64).T  # M = Rz(rot) Ry(tilt) Rz(psi)
    sin_tilt = np.hypot(M[0, 2], M[1, 2])
    tilt = np.arctan2(sin_tilt, M[2, 2])
    if sin_tilt > GIMBAL_EPS:
        rot = np.arctan2(M[1, 2], M[0, 2])
        psi = np.arctan2(M[2, 1], -M[2, 0])
    elif M[2, 2] > 0:
        rot = 0.0
        psi = np.arctan2(M[1, 0], M[0, 0])
    else:
        rot = 0.0
        psi = np.arctan2(M[1, 0], -M[0, 0])
    return float(np.degrees(rot)), float(np.degrees(tilt)), float(np.degrees(psi))


def geodesic_distance_deg(R1: np.ndarray, R2: np.ndarray) -> float:
    """Rotation angle of ``R1^T R2`` in degrees (atan2 form, accurate near 0)."""
    M = np.asarray(R1).T @ np.asarray(R2)
    s = 0.5 * np.linalg.norm([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])
    c = (np.trace(M) - 1) / 2
    return float(np.degrees(np.arctan2(s, c)))

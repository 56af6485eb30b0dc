"""Zero padding and rotational alignment of volumes.

Alignment is an exhaustive search over a near-uniform SO(3) grid on
downsampled volumes followed by a greedy local refinement at full size.
Only rotations about the box centre are searched.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..grid import GridError, Volume, check_same_grid, fourier_crop, rotate_volume
from .curve import auc_fsc, fsc


def zero_pad(v: Volume, D_new: int) -> Volume:
    """Centre ``v`` in a ``D_new`` box of zeros (origin voxel D//2 -> D_new//2)."""
    D = v.D
    if D_new < D or D_new % 2:
        raise GridError(f"target size {D_new} must be even and >= {D}")
    lo = D_new // 2 - D // 2
    out = np.zeros((D_new,) * 3)
    out[lo:lo + D, lo:lo + D, lo:lo + D] = v.data
    return Volume(out, v.pixel_size)


def _axis_angle(axis, deg) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    a = np.radians(deg)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(a) * K + (1 - np.cos(a)) * K @ K


def so3_grid(step_deg: float) -> np.ndarray:
    """Rotations with roughly ``step_deg`` spacing: Fibonacci-sphere directions
    for the rotated z axis times uniformly spaced in-plane angles. The identity
    is always the first element."""
    step = np.radians(step_deg)
    n_dir = max(2, int(np.ceil(4 * np.pi / step**2)))
    n_psi = max(1, int(np.ceil(360.0 / step_deg)))
    i = np.arange(n_dir) + 0.5
    z = 1 - 2 * i / n_dir
    phi = np.pi * (1 + 5**0.5) * i
    r = np.sqrt(1 - z * z)
    dirs = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    out = [np.eye(3)]
    ez = np.array([0.0, 0.0, 1.0])
    for d in dirs:
        c = np.cross(ez, d)
        s = np.linalg.norm(c)
        base = _axis_angle(c, np.degrees(np.arctan2(s, d[2]))) if s > 1e-12 else (
            np.eye(3) if d[2] > 0 else np.diag([1.0, -1.0, -1.0]))
        for k in range(n_psi):
            out.append(base @ _axis_angle(ez, k * 360.0 / n_psi))
    return np.array(out)


def _score(ref: np.ndarray, moving: Volume, R: np.ndarray, order: int = 1) -> float:
    m = rotate_volume(moving, R, order=order).data
    m = m - m.mean()
    r = ref - ref.mean()
    den = np.sqrt((m * m).sum() * (r * r).sum())
    return float((m * r).sum() / den) if den > 0 else 0.0


def align_volumes(ref: Volume, moving: Volume, coarse_step: float = 15.0, min_step: float = 1.0,
                  threads: int = 1):
    """Rotation ``R`` maximizing the correlation of ``rotate_volume(moving, R)``
    with ``ref``.

    Returns ``(R, aligned, score)``. If the aligned map would score a lower
    AUC-FSC against ``ref`` than the unaligned one, the identity is returned.
    """
    check_same_grid(ref, moving, "alignment inputs")
    D = ref.D
    small = D // 2 if D >= 16 else D
    rs = fourier_crop(ref, small) if small < D else ref
    ms = fourier_crop(moving, small) if small < D else moving
    grid = so3_grid(coarse_step)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        coarse = list(ex.map(lambda R: _score(rs.data, ms, R), grid))
    best = grid[int(np.argmax(coarse))]
    best_score = _score(ref.data, moving, best)
    step = coarse_step / 2
    axes = np.eye(3)
    while step >= min_step:
        cands = [best @ _axis_angle(ax, s) for ax in axes for s in (step, -step)]
        scores = [_score(ref.data, moving, R) for R in cands]
        j = int(np.argmax(scores))
        if scores[j] > best_score:
            best, best_score = cands[j], scores[j]
        else:
            step /= 2
    # re-orthonormalize accumulated products
    u, _, vt = np.linalg.svd(best)
    best = u @ vt
    aligned = rotate_volume(moving, best, order=3)
    if auc_fsc(fsc(ref, aligned)) < auc_fsc(fsc(ref, moving)):
        return np.eye(3), moving, _score(ref.data, moving, np.eye(3))
    return best, aligned, _score(ref.data, moving, best, order=3)

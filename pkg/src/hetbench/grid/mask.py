from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import ndimage

from .containers import GridError, MaskVolume, Volume, check_same_grid


def cosine_edge(distance: np.ndarray, dilation_px: float, soft_width_px: float) -> np.ndarray:
    """Mask value as a function of distance (px) from the binarized region.

    1 up to ``dilation_px``, raised-cosine fall to 0 over ``soft_width_px``.
    """
    d = np.asarray(distance, dtype=np.float64)
    out = np.where(d <= dilation_px, 1.0, 0.0)
    if soft_width_px > 0:
        t = (d - dilation_px) / soft_width_px
        edge = (t > 0) & (t < 1)
        out = np.where(edge, 0.5 * (1.0 + np.cos(np.pi * t)), out)
    return out


def generate_mask(
    vols: Sequence[Volume],
    threshold: float | None = None,
    dilation_px: int = 8,
    soft_width_px: int = 5,
) -> MaskVolume:
    """Soft mask around the union of ``vols``.

    The voxelwise maximum of the volumes is binarized at ``threshold``
    (default: half its maximum), grown by ``dilation_px`` using the exact
    Euclidean distance transform, then padded with a raised-cosine edge of
    ``soft_width_px``.
    """
    vols = list(vols)
    if not vols:
        raise GridError("generate_mask needs at least one volume")
    for v in vols[1:]:
        check_same_grid(vols[0], v, "mask input volumes")
    if dilation_px < 0 or soft_width_px < 0:
        raise GridError("dilation and soft width must be non-negative")
    combined = np.max(np.stack([v.data for v in vols]), axis=0)
    if threshold is None:
        threshold = 0.5 * combined.max()
    binary = combined > threshold
    if not binary.any():
        raise GridError(f"threshold {threshold} leaves an empty mask")
    dist = ndimage.distance_transform_edt(~binary)
    return MaskVolume(cosine_edge(dist, dilation_px, soft_width_px), vols[0].pixel_size)


def apply_mask(v: Volume, m: MaskVolume) -> Volume:
    check_same_grid(v, m, "volume and mask")
    return Volume(v.data * m.data, v.pixel_size)

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .containers import Volume

# array axes are (z, y, x); rotation matrices act on (x, y, z) column vectors
_REVERSE = np.eye(3)[::-1]


def rotate_volume(v: Volume, R: np.ndarray, order: int = 1) -> Volume:
    """Real-space rotation about voxel ``D//2``: ``out(x) = v(R^T x)``.

    Samples outside the box read as zero.
    """
    R = np.asarray(R, dtype=np.float64)
    M = _REVERSE @ R.T @ _REVERSE
    c = np.full(3, v.D // 2, dtype=np.float64)
    out = ndimage.affine_transform(v.data, M, offset=c - M @ c, order=order, mode="constant", cval=0.0)
    return Volume(out, v.pixel_size)

"""Tomographic projection by central-slice extraction.

The volume is zero-padded by ``oversample`` in real space before its spectrum
is taken, which makes trilinear interpolation of the spectrum far more
accurate for off-grid slices. For poses whose slice lands on grid points
(e.g. the identity) the result is the exact axis sum.

Off-grid error against an exact rotation scales roughly with
(object radius / padded box)^2: about 0.5% relative L2 for a particle of
Gaussian radius D/13 at ``oversample=3`` and about 2.5x more at 2. Memory is
16 * (oversample * D)^3 bytes per cached volume.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..grid import Image, Volume, ft, ift
from .ctf import hermitian_symmetrize
from .pose import Pose

DEFAULT_OVERSAMPLE = 3


def phase_shift_2d(D: int, translation) -> np.ndarray:
    """Centered Fourier phase ramp shifting an image by ``(tx, ty)`` pixels."""
    k = np.arange(D) - D // 2
    tx, ty = translation
    return np.exp(-2j * np.pi * (k[None, :] * tx + k[:, None] * ty) / D)


class Projector:
    """Caches the padded spectrum of one volume for repeated slicing."""

    def __init__(self, v: Volume, oversample: int = DEFAULT_OVERSAMPLE):
        if oversample < 1:
            raise ValueError("oversample must be >= 1")
        self.D = v.D
        self.pixel_size = v.pixel_size
        self.Dp = v.D * oversample
        pad = (self.Dp - v.D) // 2
        spec = ft(np.pad(v.data, pad))
        self._re = np.ascontiguousarray(spec.real)
        self._im = np.ascontiguousarray(spec.imag)
        k = np.arange(self.Dp) - self.Dp // 2
        ky, kx = np.meshgrid(k, k, indexing="ij")
        self._plane = np.stack([kx.ravel(), ky.ravel(), np.zeros(kx.size)]).astype(np.float64)

    def slice(self, R: np.ndarray) -> np.ndarray:
        """Central slice ``V(R^T k)`` on the padded Dp x Dp grid, trilinear."""
        q = np.asarray(R, dtype=np.float64).T @ self._plane  # (x, y, z) frequency coords
        coords = q[::-1] + self.Dp // 2  # array order (z, y, x)
        re = ndimage.map_coordinates(self._re, coords, order=1, mode="constant", cval=0.0)
        im = ndimage.map_coordinates(self._im, coords, order=1, mode="constant", cval=0.0)
        return (re + 1j * im).reshape(self.Dp, self.Dp)

    def project_unshifted(self, R: np.ndarray) -> np.ndarray:
        # ortho scaling: the 2-D transform of a z-sum is sqrt(Dp) times the 3-D slice
        img = ift(np.sqrt(self.Dp) * self.slice(R)).real
        lo = (self.Dp - self.D) // 2
        return img[lo:lo + self.D, lo:lo + self.D]

    def project(self, pose: Pose, transfer: np.ndarray | None = None) -> np.ndarray:
        """Projection under ``pose``, translated by a Fourier phase ramp and
        optionally multiplied by a real transfer array in Fourier space."""
        img = self.project_unshifted(pose.rotation)
        t = pose.translation
        if transfer is None and not np.any(t):
            return img
        f = ft(img)
        if np.any(t):
            f = f * phase_shift_2d(self.D, t)
        if transfer is not None:
            f = f * hermitian_symmetrize(transfer)
        return ift(f).real


def project(v: Volume, pose: Pose, oversample: int = DEFAULT_OVERSAMPLE) -> Image:
    return Image(Projector(v, oversample).project(pose), v.pixel_size)

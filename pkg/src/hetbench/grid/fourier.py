"""Fourier conventions shared by the whole package.

All spectra are DC-centered and orthonormally scaled:

    F = fftshift(fftn(ifftshift(x), norm="ortho"))

so the real-space origin is voxel ``D//2`` and the DC coefficient equals
``sum(x) / sqrt(x.size)``. Parseval holds without extra factors:
``sum(x**2) == sum(abs(F)**2)``.
"""
from __future__ import annotations

import numpy as np

from .containers import FourierGrid, GridError, Image, ImageStack, Volume


def ft(x: np.ndarray, axes=None) -> np.ndarray:
    """Centered orthonormal forward FFT over ``axes`` (default: all)."""
    if axes is None:
        axes = tuple(range(x.ndim))
    return np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(x, axes=axes), axes=axes, norm="ortho"), axes=axes)


def ift(f: np.ndarray, axes=None) -> np.ndarray:
    """Inverse of :func:`ft`. Returns a complex array."""
    if axes is None:
        axes = tuple(range(f.ndim))
    return np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(f, axes=axes), axes=axes, norm="ortho"), axes=axes)


def fourier_transform(v: Volume | Image) -> FourierGrid:
    if not isinstance(v, (Volume, Image)):
        raise GridError(f"expected Volume or Image, got {type(v).__name__}")
    # containers already reject non-finite data
    return FourierGrid(ft(v.data), v.pixel_size)


def inverse_fourier_transform(f: FourierGrid) -> Volume | Image:
    data = ift(f.data).real
    if data.ndim == 3:
        return Volume(data, f.pixel_size)
    return Image(data, f.pixel_size)


def frequency_grid(D: int, ndim: int) -> list[np.ndarray]:
    """Integer frequency indices (-D/2 .. D/2-1) broadcast over ``ndim`` axes,
    returned in array-axis order."""
    k = np.arange(D) - D // 2
    return np.meshgrid(*([k] * ndim), indexing="ij", sparse=True)


def radial_index(D: int, ndim: int) -> np.ndarray:
    """Distance of each centered Fourier sample from DC, in frequency bins."""
    grids = frequency_grid(D, ndim)
    return np.sqrt(sum(g.astype(np.float64) ** 2 for g in grids))


def _central_block(f: np.ndarray, D_new: int, ndim: int) -> np.ndarray:
    D = f.shape[-1]
    lo = D // 2 - D_new // 2
    sl = (Ellipsis,) + (slice(lo, lo + D_new),) * ndim
    return f[sl]


def _crop_array(x: np.ndarray, D_new: int, ndim: int) -> np.ndarray:
    D = x.shape[-1]
    axes = tuple(range(x.ndim - ndim, x.ndim))
    f = _central_block(ft(x, axes), D_new, ndim)
    # keeps the real-space mean: DC scales with sqrt(size) under ortho norm
    f = f * (D_new / D) ** (ndim / 2)
    return ift(f, axes).real


def fourier_crop(v, D_new: int):
    """Downsample by keeping the central ``D_new`` block of the spectrum.

    Works on :class:`Volume`, :class:`Image` and :class:`ImageStack`. The
    retained coefficients are rescaled by ``(D_new/D)**(ndim/2)`` so that real
    space values (e.g. a constant map) are preserved. Pixel size grows by
    ``D / D_new``.
    """
    D = v.D
    if D_new % 2 or D_new < 2:
        raise GridError(f"target size must be even and >= 2, got {D_new}")
    if D_new >= D:
        raise GridError(f"target size {D_new} must be smaller than {D}")
    ndim = 3 if isinstance(v, Volume) else 2
    data = _crop_array(v.data, D_new, ndim)
    return type(v)(data, v.pixel_size * D / D_new)


def fourier_pad(v, D_new: int):
    """Upsample by zero-padding the spectrum (inverse of :func:`fourier_crop`
    for band-limited input)."""
    D = v.D
    if D_new % 2 or D_new <= D:
        raise GridError(f"target size must be even and larger than {D}, got {D_new}")
    ndim = 3 if isinstance(v, Volume) else 2
    axes = tuple(range(v.data.ndim - ndim, v.data.ndim))
    f = ft(v.data, axes)
    out = np.zeros(v.data.shape[: v.data.ndim - ndim] + (D_new,) * ndim, dtype=np.complex128)
    lo = D_new // 2 - D // 2
    out[(Ellipsis,) + (slice(lo, lo + D),) * ndim] = f * (D_new / D) ** (ndim / 2)
    return type(v)(ift(out, axes).real, v.pixel_size * D / D_new)

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GridError(ValueError):
    """Raised when a grid container or grid operation receives invalid input."""


def _frozen(data, dtype=np.float64) -> np.ndarray:
    arr = np.array(data, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_pixel_size(pixel_size: float) -> float:
    pixel_size = float(pixel_size)
    if not np.isfinite(pixel_size) or pixel_size <= 0:
        raise GridError(f"pixel_size must be positive, got {pixel_size}")
    return pixel_size


def _check_even(D: int) -> None:
    if D < 2 or D % 2:
        raise GridError(f"grid size must be even and >= 2, got {D}")


@dataclass(frozen=True, eq=False)
class Volume:
    """Cubic D x D x D density grid, indexed ``data[z, y, x]``.

    The box center (origin of all rotations and the Fourier DC term) sits at
    voxel index ``(D//2, D//2, D//2)``.
    """

    data: np.ndarray
    pixel_size: float = 1.0

    def __post_init__(self):
        data = _frozen(self.data)
        if data.ndim != 3 or len(set(data.shape)) != 1:
            raise GridError(f"volume must be cubic 3-D, got shape {data.shape}")
        _check_even(data.shape[0])
        if not np.all(np.isfinite(data)):
            raise GridError("volume contains non-finite values")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "pixel_size", _check_pixel_size(self.pixel_size))

    @property
    def D(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True, eq=False)
class Image:
    """Square D x D image indexed ``data[y, x]``."""

    data: np.ndarray
    pixel_size: float = 1.0

    def __post_init__(self):
        data = _frozen(self.data)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise GridError(f"image must be square 2-D, got shape {data.shape}")
        _check_even(data.shape[0])
        if not np.all(np.isfinite(data)):
            raise GridError("image contains non-finite values")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "pixel_size", _check_pixel_size(self.pixel_size))

    @property
    def D(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True, eq=False)
class ImageStack:
    """N square images sharing one pixel size, ``data[n, y, x]``."""

    data: np.ndarray
    pixel_size: float = 1.0

    def __post_init__(self):
        data = _frozen(self.data)
        if data.ndim != 3 or data.shape[1] != data.shape[2]:
            raise GridError(f"image stack must be N x D x D, got shape {data.shape}")
        _check_even(data.shape[1])
        if not np.all(np.isfinite(data)):
            raise GridError("image stack contains non-finite values")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "pixel_size", _check_pixel_size(self.pixel_size))

    @property
    def D(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, i: int) -> Image:
        return Image(self.data[i], self.pixel_size)


@dataclass(frozen=True, eq=False)
class MaskVolume:
    """Soft mask with values in [0, 1] on a volume grid."""

    data: np.ndarray
    pixel_size: float = 1.0

    def __post_init__(self):
        data = _frozen(self.data)
        if data.ndim != 3 or len(set(data.shape)) != 1:
            raise GridError(f"mask must be cubic 3-D, got shape {data.shape}")
        _check_even(data.shape[0])
        if not np.all(np.isfinite(data)) or data.min() < 0 or data.max() > 1:
            raise GridError("mask values must lie in [0, 1]")
        if not np.any(data > 0):
            raise GridError("mask is empty")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "pixel_size", _check_pixel_size(self.pixel_size))

    @property
    def D(self) -> int:
        return self.data.shape[0]

    def as_volume(self) -> Volume:
        return Volume(self.data, self.pixel_size)


@dataclass(frozen=True, eq=False)
class FourierGrid:
    """DC-centered spectrum of a real grid.

    ``data`` is complex with the zero frequency at index ``D//2`` on every
    axis. The frequency step is ``1 / (D * pixel_size)`` 1/Angstrom.
    """

    data: np.ndarray
    pixel_size: float = 1.0

    def __post_init__(self):
        data = _frozen(self.data, dtype=np.complex128)
        if data.ndim not in (2, 3) or len(set(data.shape)) != 1:
            raise GridError(f"Fourier grid must be square/cubic, got shape {data.shape}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "pixel_size", _check_pixel_size(self.pixel_size))

    @property
    def D(self) -> int:
        return self.data.shape[0]

    @property
    def frequency_step(self) -> float:
        return 1.0 / (self.D * self.pixel_size)


def check_same_grid(a, b, what: str = "grids") -> None:
    if a.data.shape != b.data.shape:
        raise GridError(f"{what} differ in shape: {a.data.shape} vs {b.data.shape}")
    if not np.isclose(a.pixel_size, b.pixel_size, rtol=1e-6, atol=0):
        raise GridError(f"{what} differ in pixel size: {a.pixel_size} vs {b.pixel_size}")

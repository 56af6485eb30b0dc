"""Contrast transfer function.

    CTF(k) = -sqrt(1 - w^2) sin(chi) - w cos(chi)
    chi(k) = pi * lambda * df(theta) * |k|^2 - pi/2 * Cs * lambda^3 * |k|^4 + phase_shift
    df(theta) = (du + dv)/2 + (du - dv)/2 * cos(2 (theta - astigmatism_angle))

Defocus is positive for underfocus. Units: Angstrom, kV, mm, degrees.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grid import Image, ImageStack, ft, ift


@dataclass(frozen=True)
class CtfParams:
    defocus_u: float
    defocus_v: float
    astigmatism_angle: float = 0.0
    voltage: float = 300.0
    spherical_aberration: float = 2.7
    amplitude_contrast: float = 0.1
    phase_shift: float = 0.0

    def __post_init__(self):
        if not self.voltage > 0:
            raise ValueError(f"voltage must be positive, got {self.voltage}")
        if not (np.isfinite(self.defocus_u) and np.isfinite(self.defocus_v)):
            raise ValueError("defocus values must be finite")
        if not 0 <= self.amplitude_contrast <= 1:
            raise ValueError(f"amplitude contrast must lie in [0, 1], got {self.amplitude_contrast}")


def electron_wavelength(voltage_kv: float) -> float:
    """Relativistic electron wavelength in Angstrom."""
    v = voltage_kv * 1e3
    return 12.2642598 / np.sqrt(v * (1 + 0.97848e-6 * v))


def aberration_phase(p: CtfParams, kx: np.ndarray, ky: np.ndarray) -> np.ndarray:
    """chi at spatial frequencies ``kx, ky`` in 1/Angstrom."""
    lam = electron_wavelength(p.voltage)
    cs = p.spherical_aberration * 1e7
    s2 = kx**2 + ky**2
    theta = np.arctan2(ky, kx)
    df = 0.5 * (p.defocus_u + p.defocus_v) + 0.5 * (p.defocus_u - p.defocus_v) * np.cos(
        2 * (theta - np.radians(p.astigmatism_angle)))
    return np.pi * lam * df * s2 - 0.5 * np.pi * cs * lam**3 * s2**2 + np.radians(p.phase_shift)


def ctf_from_phase(chi: np.ndarray, w: float) -> np.ndarray:
    return -np.sqrt(1 - w**2) * np.sin(chi) - w * np.cos(chi)


def frequency_axes(D: int, pixel_size: float) -> tuple[np.ndarray, np.ndarray]:
    """Centered 2-D frequency grid (ky, kx) in 1/Angstrom, each D x D."""
    k = (np.arange(D) - D // 2) / (D * pixel_size)
    ky, kx = np.meshgrid(k, k, indexing="ij")
    return ky, kx


def ctf_evaluate(p: CtfParams, D: int, pixel_size: float) -> np.ndarray:
    """Transfer array on the centered D x D grid (DC at ``[D//2, D//2]``)."""
    ky, kx = frequency_axes(D, pixel_size)
    return ctf_from_phase(aberration_phase(p, kx, ky), p.amplitude_contrast)


def hermitian_symmetrize(c: np.ndarray) -> np.ndarray:
    """Average a centered transfer array with its point reflection.

    Only the unpaired Nyquist row/column change; elsewhere the CTF is already
    even in k.
    """
    flipped = np.roll(c[::-1, ::-1], 1, axis=(0, 1))
    return 0.5 * (c + flipped)


def apply_transfer(images: np.ndarray, transfer: np.ndarray) -> np.ndarray:
    """Multiply the spectrum of image(s) ``[..., D, D]`` by a real transfer array."""
    f = ft(images, axes=(-2, -1)) * hermitian_symmetrize(transfer)
    return ift(f, axes=(-2, -1)).real


def apply_ctf(img: Image | ImageStack, p: CtfParams) -> Image | ImageStack:
    c = ctf_evaluate(p, img.D, img.pixel_size)
    return type(img)(apply_transfer(img.data, c), img.pixel_size)

"""Fourier shell correlation and its area under the curve.

Shells are integer-radius bins of the centered frequency grid: voxel k goes
to shell ``round(|k|)`` and shells 0..D/2 are kept, reported at frequency
``r / D`` cycles per pixel. Shell 0 (the DC term) is included so that a curve
that is identically one integrates to exactly 0.5 over [0, 0.5].
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..grid import GridError, MaskVolume, Volume, check_same_grid, ft


# shell energy below this fraction of the volume's total counts as zero
# (FFT round-off leaves ~1e-30 where a band-limited map has no content)
ZERO_ENERGY_RTOL = 1e-20


class FscError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FscCurve:
    shell_freq: np.ndarray  # cycles per pixel
    correlation: np.ndarray
    shell_size: np.ndarray  # voxels per shell
    degenerate: np.ndarray  # shells with zero energy in either input (correlation set to 0)

    def __post_init__(self):
        f = np.asarray(self.shell_freq, dtype=float)
        c = np.asarray(self.correlation, dtype=float)
        if f.shape != c.shape or f.ndim != 1:
            raise FscError("frequencies and correlations must be 1-D and of equal length")
        if np.any(np.diff(f) <= 0):
            raise FscError("shell frequencies must be strictly increasing")
        if not np.all(np.isfinite(c)):
            raise FscError("correlations must be finite")
        object.__setattr__(self, "shell_freq", f)
        object.__setattr__(self, "correlation", c)

    @property
    def any_degenerate(self) -> bool:
        return bool(np.any(self.degenerate))

    def resolution_at(self, threshold: float = 0.143) -> float:
        """First frequency at which the curve drops below ``threshold`` (0.5 if never)."""
        below = np.flatnonzero(self.correlation < threshold)
        return float(self.shell_freq[below[0]]) if below.size else 0.5


@lru_cache(maxsize=8)
def shell_index(D: int) -> np.ndarray:
    """Shell number per voxel of a centered D^3 grid; -1 beyond Nyquist."""
    k = np.arange(D) - D // 2
    r = np.sqrt(k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2)
    s = np.rint(r).astype(np.int64)
    s[s > D // 2] = -1
    s.setflags(write=False)
    return s


def fsc_from_spectra(fa: np.ndarray, fb: np.ndarray) -> FscCurve:
    D = fa.shape[0]
    s = shell_index(D)
    keep = s >= 0
    idx = s[keep]
    n = D // 2 + 1
    a, b = fa[keep], fb[keep]
    num = np.bincount(idx, (a * b.conj()).real, minlength=n)
    ea = np.bincount(idx, (a * a.conj()).real, minlength=n)
    eb = np.bincount(idx, (b * b.conj()).real, minlength=n)
    size = np.bincount(idx, minlength=n)
    den = np.sqrt(ea * eb)
    degenerate = (ea <= ZERO_ENERGY_RTOL * ea.sum()) | (eb <= ZERO_ENERGY_RTOL * eb.sum()) | (den == 0)
    corr = np.divide(num, den, out=np.zeros(n), where=~degenerate)
    corr = np.clip(corr, -1.0, 1.0)
    return FscCurve(np.arange(n) / D, corr, size, degenerate)


def _masked(v: Volume, mask: MaskVolume | None) -> np.ndarray:
    return v.data if mask is None else v.data * mask.data


def fsc(a: Volume, b: Volume, mask: MaskVolume | None = None) -> FscCurve:
    """Shell-wise correlation of two volumes, optionally after a real-space mask."""
    try:
        check_same_grid(a, b, "FSC inputs")
        if mask is not None:
            check_same_grid(a, mask, "FSC mask")
    except GridError as exc:
        raise FscError(str(exc)) from exc
    return fsc_from_spectra(ft(_masked(a, mask)), ft(_masked(b, mask)))


def auc_fsc(c: FscCurve) -> float:
    """Trapezoidal area under the (unclamped) curve; 0.5 for identical volumes."""
    return float(np.trapezoid(c.correlation, c.shell_freq))

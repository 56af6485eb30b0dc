"""Synthetic two-domain models for desk-scale benchmarks.

A fixed domain sits at the origin and a second domain hangs at the end of an
arm that swings about the z axis, so a sweep of the arm angle
traces a closed one-dimensional conformational path.
"""
from __future__ import annotations

import numpy as np

from .atoms import AtomicModel, ModelError


def blob_points(n_atoms: int, radius: float, seed: int = 0) -> np.ndarray:
    """``n_atoms`` points uniform in a ball of ``radius`` (deterministic)."""
    rng = np.random.default_rng([seed, 7])
    d = rng.standard_normal((n_atoms, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * radius * rng.random(n_atoms)[:, None] ** (1 / 3)


def two_blob_model(angle_deg: float, n_atoms: int = 60, blob_radius: float = 4.0, arm: float = 12.0,
                   seed: int = 0, fixed_atoms: int | None = None) -> AtomicModel:
    """Two carbon blobs; the second is centred at ``arm`` * (cos a, sin a, 0)
    and turns with the arm, so conformations differ by a rigid rotation of
    chain B about z.

    Chain B has ``n_atoms`` atoms, chain A ``fixed_atoms`` (default the same),
    drawn from the same point cloud. With ``blob_radius=0`` every atom of a
    chain sits at its centre and the atom counts act as blob weights.
    """
    nf = n_atoms if fixed_atoms is None else fixed_atoms
    if n_atoms < 1 or nf < 1 or blob_radius < 0 or arm <= 0:
        raise ModelError("need n_atoms >= 1, fixed_atoms >= 1, blob_radius >= 0 and arm > 0")
    pts = blob_points(max(n_atoms, nf), blob_radius, seed)
    a = np.radians(angle_deg)
    Rz = np.array([[np.cos(a), -np.sin(a), 0], [np.sin(a), np.cos(a), 0], [0, 0, 1.0]])
    moving = (pts[:n_atoms] + [arm, 0.0, 0.0]) @ Rz.T
    coords = np.vstack([pts[:nf], moving])
    n = nf + n_atoms
    return AtomicModel(
        coords,
        elements=("C",) * n,
        names=("CA",) * n,
        res_names=("GLY",) * n,
        res_seq=np.concatenate([np.arange(1, nf + 1), np.arange(1, n_atoms + 1)]),
        chains=("A",) * nf + ("B",) * n_atoms,
        source=f"two_blob angle={float(angle_deg)!r}",
    )


def two_blob_series(n_conformations: int, **kw) -> tuple[list[AtomicModel], np.ndarray]:
    """Models at arm angles 360 * i / n for i = 0..n-1, with the angles."""
    if n_conformations < 1:
        raise ModelError("at least one conformation is required")
    angles = 360.0 * np.arange(n_conformations) / n_conformations
    return [two_blob_model(a, **kw) for a in angles], angles

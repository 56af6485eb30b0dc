"""Ground-truth heterogeneity embeddings and smearing."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..grid import Volume, fourier_crop
from .matrix import EmbeddingError, EmbeddingMatrix

KINDS = ("circular_angle", "angle_plus_com", "rank_size", "voxel_intensity", "cv_pair", "pose", "ctf")
CIRCULAR = ("circular_angle", "angle_plus_com")


def _replicate(values: np.ndarray, labels) -> np.ndarray:
    if labels is None:
        return values
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise EmbeddingError("labels must be a non-empty 1-D vector")
    if labels.min() < 0 or labels.max() >= len(values):
        raise EmbeddingError(f"labels index {len(values)} structures out of range")
    return values[labels]


def _circular_rows(angle_deg, com=None) -> np.ndarray:
    a = np.radians(angle_deg)
    cols = [np.sin(a)[:, None], np.cos(a)[:, None]]
    if com is not None:
        cols.insert(0, com)
    return np.hstack(cols)


def center_crop(v: np.ndarray, size: int) -> np.ndarray:
    D = v.shape[0]
    if size > D or size % 2:
        raise EmbeddingError(f"crop size {size} must be even and <= {D}")
    lo = D // 2 - size // 2
    return v[lo:lo + size, lo:lo + size, lo:lo + size]


def gt_embedding(kind: str, *, labels=None, angles=None, com=None, sizes=None,
                 volumes: Sequence[Volume] | None = None, crop: int | None = None, size: int = 16,
                 cv=None, rotations=None, ctfs=None) -> EmbeddingMatrix:
    """Build a ground-truth embedding.

    Per-structure inputs (``angles``, ``com``, ``sizes``, ``volumes``, ``cv``)
    are expanded to one row per image through ``labels`` when given.

    circular_angle   angles (deg) -> (sin, cos)
    angle_plus_com   com (S,) or (S, c) and angles -> (com..., sin, cos)
    rank_size        sizes -> 0-based rank (smallest is 0)
    voxel_intensity  volumes, real-space ``crop`` then Fourier crop to ``size``^3
    cv_pair          cv (S, 2) collective variables
    pose             rotations (N, 3, 3) -> 9 flattened entries
    ctf              ctfs -> standardized (defocus_u, defocus_v, sin a, cos a)
    """
    if kind not in KINDS:
        raise EmbeddingError(f"unknown embedding kind {kind!r}; expected one of {', '.join(KINDS)}")

    def need(x, name):
        if x is None:
            raise EmbeddingError(f"kind {kind!r} needs {name}")
        return x

    raw = {}
    if kind in CIRCULAR:
        ang = _replicate(np.asarray(need(angles, "angles"), dtype=float).ravel(), labels)
        raw["angle"] = ang
        c = None
        if kind == "angle_plus_com":
            c = np.asarray(need(com, "com"), dtype=float)
            c = c[:, None] if c.ndim == 1 else c
            if len(c) != len(np.asarray(angles).ravel()):
                raise EmbeddingError("com and angles differ in length")
            c = _replicate(c, labels)
            raw["com"] = c
        rows = _circular_rows(ang, c)
    elif kind == "rank_size":
        s = np.asarray(need(sizes, "sizes"), dtype=float).ravel()
        ranks = np.empty(len(s))
        ranks[np.argsort(s, kind="stable")] = np.arange(len(s))
        rows = _replicate(ranks, labels)[:, None]
    elif kind == "voxel_intensity":
        vols = list(need(volumes, "volumes"))
        feats = []
        for v in vols:
            data = v.data if crop is None else center_crop(v.data, crop)
            feats.append(fourier_crop(Volume(data, v.pixel_size), size).data.ravel())
        rows = _replicate(np.array(feats), labels)
    elif kind == "cv_pair":
        c = np.asarray(need(cv, "cv"), dtype=float)
        if c.ndim != 2 or c.shape[1] != 2:
            raise EmbeddingError(f"cv must be (S, 2), got {c.shape}")
        rows = _replicate(c, labels)
    elif kind == "pose":
        R = np.asarray(need(rotations, "rotations"), dtype=float)
        if R.ndim != 3 or R.shape[1:] != (3, 3):
            raise EmbeddingError(f"rotations must be (N, 3, 3), got {R.shape}")
        rows = R.reshape(len(R), 9)
    else:  # ctf
        c = list(need(ctfs, "ctfs"))
        a = np.radians([p.astigmatism_angle for p in c])
        m = np.column_stack([[p.defocus_u for p in c], [p.defocus_v for p in c], np.sin(a), np.cos(a)])
        sd = m.std(axis=0)
        rows = (m - m.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    return EmbeddingMatrix(rows, kind, raw)


def smear(emb: EmbeddingMatrix, epsilon: float, rng: np.random.Generator) -> EmbeddingMatrix:
    """Add U[-epsilon, epsilon] noise to every variable.

    For circular kinds the noise goes on the angle (degrees) and centre of
    mass before the sin/cos transform, so the output rows stay on the circle.
    """
    if epsilon < 0:
        raise EmbeddingError("epsilon must be non-negative")
    if epsilon == 0:
        return emb
    if emb.kind in CIRCULAR and "angle" in emb.raw:
        ang = emb.raw["angle"] + rng.uniform(-epsilon, epsilon, emb.raw["angle"].shape)
        raw = {"angle": ang}
        com = None
        if "com" in emb.raw:
            com = emb.raw["com"] + rng.uniform(-epsilon, epsilon, emb.raw["com"].shape)
            raw["com"] = com
        return EmbeddingMatrix(_circular_rows(ang, com), emb.kind, raw)
    rows = emb.rows + rng.uniform(-epsilon, epsilon, emb.rows.shape)
    return EmbeddingMatrix(rows, emb.kind, dict(emb.raw))

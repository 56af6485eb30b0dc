"""Tab-separated pose and CTF tables.

Pose table: header ``r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty`` (rotation
row-major, translation in pixels), one row per image. CTF table: header
``defocus_u defocus_v astigmatism_angle voltage spherical_aberration
amplitude_contrast phase_shift``. Values use ``repr`` so they round-trip
exactly.
"""
from __future__ import annotations

from dataclasses import astuple, fields

import numpy as np

from .ctf import CtfParams

POSE_COLUMNS = ["r00", "r01", "r02", "r10", "r11", "r12", "r20", "r21", "r22", "tx", "ty"]
CTF_COLUMNS = [f.name for f in fields(CtfParams)]


class TableError(ValueError):
    pass


def _rows(text: str, header: list[str] | None, min_cols: int = 1):
    lines = [(n, l) for n, l in enumerate(text.splitlines(), 1) if l.strip() and not l.startswith("#")]
    if not lines:
        raise TableError("table is empty")
    cols = lines[0][1].split("\t")
    if header is not None and cols[: len(header)] != header and cols != header[: len(cols)]:
        raise TableError(f"line {lines[0][0]}: unexpected header {cols}")
    out = []
    for n, l in lines[1:]:
        parts = l.split("\t")
        if len(parts) != len(cols):
            raise TableError(f"line {n}: {len(parts)} fields, header has {len(cols)}")
        try:
            out.append([float(x) for x in parts])
        except ValueError:
            raise TableError(f"line {n}: non-numeric field") from None
    return cols, np.array(out).reshape(len(out), len(cols))


def format_pose_table(rotations: np.ndarray, translations: np.ndarray) -> str:
    rows = ["\t".join(POSE_COLUMNS)]
    for R, t in zip(rotations, translations):
        rows.append("\t".join(repr(float(x)) for x in list(np.ravel(R)) + list(t)))
    return "\n".join(rows) + "\n"


def read_pose_table(text: str) -> tuple[np.ndarray, np.ndarray]:
    _, a = _rows(text, POSE_COLUMNS)
    if a.shape[1] != 11:
        raise TableError("pose table needs 11 columns")
    return a[:, :9].reshape(-1, 3, 3), a[:, 9:]


def format_ctf_table(ctfs) -> str:
    rows = ["\t".join(CTF_COLUMNS)]
    rows += ["\t".join(repr(float(x)) for x in astuple(c)) for c in ctfs]
    return "\n".join(rows) + "\n"


def read_ctf_table(text: str, defaults: CtfParams | None = None) -> list[CtfParams]:
    """Read a CTF table. Columns may be a prefix of the full header (e.g. just
    ``defocus_u defocus_v astigmatism_angle`` for a defocus pool); missing
    fields come from ``defaults``."""
    cols, a = _rows(text, CTF_COLUMNS)
    base = astuple(defaults) if defaults is not None else None
    out = []
    for row in a:
        vals = list(row)
        if len(vals) < len(CTF_COLUMNS):
            if base is None and len(vals) < 3:
                raise TableError("CTF table needs at least the three defocus columns")
            fill = base if base is not None else astuple(CtfParams(0.0, 0.0))
            vals += list(fill[len(vals):])
        out.append(CtfParams(*vals))
    return out


def format_labels(labels) -> str:
    return "label\n" + "".join(f"{int(x)}\n" for x in labels)

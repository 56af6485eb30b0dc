"""STAR particle metadata (RELION 3.1 column names).

Files are written as a single particle block. On reading, per-group optics
columns (pixel size, voltage, Cs, amplitude contrast) may instead come from a
``data_optics`` table joined on ``_rlnOpticsGroup``.

Angles are ZYZ Euler (rot, tilt, psi) as in :mod:`.pose`. Origins are in
Angstrom with the convention that an image equals its reference projection
shifted by ``+origin``. ``_rlnClassNumber`` holds the 1-based ground-truth
structure index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ctf import CtfParams
from .pose import euler_to_matrix, matrix_to_euler


class StarError(ValueError):
    pass


@dataclass
class StarBlock:
    name: str
    pairs: dict[str, str]
    columns: list[str]
    rows: list[list[str]]

    def column(self, label: str) -> list[str]:
        try:
            j = self.columns.index(label)
        except ValueError:
            raise StarError(f"block {self.name!r} lacks column {label}") from None
        return [r[j] for r in self.rows]


def parse_star(text: str) -> list[StarBlock]:
    """Parse every ``data_`` block: key/value pairs and at most one loop each."""
    blocks: list[StarBlock] = []
    cur: StarBlock | None = None
    state = "pairs"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if state == "rows":
                state = "pairs"
            continue
        if line.startswith("data_"):
            cur = StarBlock(line[5:], {}, [], [])
            blocks.append(cur)
            state = "pairs"
            continue
        if cur is None:
            raise StarError(f"line {lineno}: content before the first data_ block")
        if line == "loop_":
            if cur.columns:
                raise StarError(f"line {lineno}: second loop in block {cur.name!r}")
            state = "header"
            continue
        if line.startswith("_"):
            parts = line.split()
            if state == "header":
                cur.columns.append(parts[0])
                continue
            if state == "rows":
                raise StarError(f"line {lineno}: label {parts[0]} after loop rows began")
            if len(parts) < 2:
                raise StarError(f"line {lineno}: label {parts[0]} without a value")
            cur.pairs[parts[0]] = " ".join(parts[1:])
            continue
        if state == "header":
            if not cur.columns:
                raise StarError(f"line {lineno}: loop_ without column labels")
            state = "rows"
        if state != "rows":
            raise StarError(f"line {lineno}: value outside a loop: {line!r}")
        fields = line.split()
        if len(fields) != len(cur.columns):
            raise StarError(f"line {lineno}: {len(fields)} fields for {len(cur.columns)} columns")
        cur.rows.append(fields)
    if not blocks:
        raise StarError("no data_ block found")
    for b in blocks:
        if b.columns == [] and "loop_" in text and not b.pairs:
            raise StarError(f"block {b.name!r} is empty")
    return blocks


def format_star(block: StarBlock) -> str:
    out = [f"data_{block.name}", ""]
    for k, v in block.pairs.items():
        out.append(f"{k} {v}")
    if block.columns:
        out += ["loop_"] + [f"{c} #{i + 1}" for i, c in enumerate(block.columns)]
        out += [" ".join(r) for r in block.rows]
    return "\n".join(out) + "\n"


@dataclass
class ParticleMetadata:
    rotations: np.ndarray  # (N, 3, 3)
    translations: np.ndarray  # (N, 2) pixels
    ctfs: list[CtfParams]
    pixel_size: float
    labels: np.ndarray | None = None
    image_names: list[str] | None = None

    def __len__(self) -> int:
        return len(self.rotations)

    @classmethod
    def from_stack(cls, stack, stack_file: str = "particles.mrcs") -> ParticleMetadata:
        names = [f"{i + 1:06d}@{stack_file}" for i in range(len(stack))]
        return cls(np.asarray(stack.rotations), np.asarray(stack.translations), list(stack.ctfs),
                   stack.pixel_size, np.asarray(stack.labels), names)


REQUIRED = [
    "_rlnAngleRot", "_rlnAngleTilt", "_rlnAnglePsi",
    "_rlnDefocusU", "_rlnDefocusV", "_rlnDefocusAngle",
    "_rlnVoltage", "_rlnSphericalAberration", "_rlnAmplitudeContrast",
]


def _num(x: float) -> str:
    return f"{x:.10f}"


def write_star(meta: ParticleMetadata) -> str:
    cols = ["_rlnImageName"] + REQUIRED + [
        "_rlnPhaseShift", "_rlnOriginXAngst", "_rlnOriginYAngst", "_rlnImagePixelSize", "_rlnClassNumber"]
    names = meta.image_names or [f"{i + 1:06d}@particles.mrcs" for i in range(len(meta))]
    labels = meta.labels if meta.labels is not None else np.zeros(len(meta), int)
    rows = []
    for i in range(len(meta)):
        rot, tilt, psi = matrix_to_euler(meta.rotations[i])
        c = meta.ctfs[i]
        tx, ty = np.asarray(meta.translations[i]) * meta.pixel_size
        rows.append([
            names[i], _num(rot), _num(tilt), _num(psi),
            _num(c.defocus_u), _num(c.defocus_v), _num(c.astigmatism_angle),
            _num(c.voltage), _num(c.spherical_aberration), _num(c.amplitude_contrast),
            _num(c.phase_shift), _num(tx), _num(ty), _num(meta.pixel_size), str(int(labels[i]) + 1),
        ])
    return format_star(StarBlock("particles", {}, cols, rows))


def _floats(block: StarBlock, label: str, default: float | None = None) -> np.ndarray:
    if label not in block.columns:
        if default is None:
            raise StarError(f"missing required column {label}")
        return np.full(len(block.rows), default)
    try:
        return np.array([float(x) for x in block.column(label)])
    except ValueError as exc:
        raise StarError(f"non-numeric value in column {label}") from exc


OPTICS = ("_rlnImagePixelSize", "_rlnVoltage", "_rlnSphericalAberration", "_rlnAmplitudeContrast")


def _with_optics(block: StarBlock, blocks: list[StarBlock]) -> StarBlock:
    """Copy optics-group columns the particle loop lacks into it."""
    optics = next((b for b in blocks if b is not block and "_rlnOpticsGroup" in b.columns), None)
    wanted = [c for c in OPTICS if c not in block.columns]
    if optics is None or not wanted:
        return block
    table = {g: row for g, row in zip(optics.column("_rlnOpticsGroup"), optics.rows)}
    if "_rlnOpticsGroup" in block.columns:
        groups = block.column("_rlnOpticsGroup")
    elif len(table) == 1:
        groups = [next(iter(table))] * len(block.rows)
    else:
        raise StarError("several optics groups but no _rlnOpticsGroup column in the particle loop")
    missing = sorted(set(groups) - set(table))
    if missing:
        raise StarError(f"optics group(s) {', '.join(missing)} not defined in block {optics.name!r}")
    add = [c for c in wanted if c in optics.columns]
    idx = [optics.columns.index(c) for c in add]
    rows = [r + [table[g][j] for j in idx] for r, g in zip(block.rows, groups)]
    return StarBlock(block.name, block.pairs, block.columns + add, rows)


def read_star(text: str, pixel_size: float | None = None) -> ParticleMetadata:
    """Read the first block that has a particle loop.

    Origins may be given in Angstrom (``_rlnOriginXAngst``) or pixels
    (``_rlnOriginX``). ``pixel_size`` overrides ``_rlnImagePixelSize``.
    Optics columns missing from the particle loop are looked up in an
    optics table by ``_rlnOpticsGroup``.
    """
    blocks = [b for b in parse_star(text) if b.columns]
    if not blocks:
        raise StarError("no loop_ block found")
    block = next((b for b in blocks if "_rlnAngleRot" in b.columns), blocks[0])
    block = _with_optics(block, blocks)
    missing = [c for c in REQUIRED if c not in block.columns]
    if missing:
        raise StarError(f"missing required columns: {', '.join(missing)}")
    if pixel_size is None:
        apix = _floats(block, "_rlnImagePixelSize", default=1.0)
        pixel_size = float(apix[0]) if len(apix) else 1.0
    rot, tilt, psi = (_floats(block, c) for c in REQUIRED[:3])
    rotations = np.stack([euler_to_matrix(a, b, c) for a, b, c in zip(rot, tilt, psi)]) if len(rot) else np.zeros((0, 3, 3))
    if "_rlnOriginXAngst" in block.columns:
        t = np.stack([_floats(block, "_rlnOriginXAngst"), _floats(block, "_rlnOriginYAngst", 0.0)], 1) / pixel_size
    else:
        t = np.stack([_floats(block, "_rlnOriginX", 0.0), _floats(block, "_rlnOriginY", 0.0)], 1)
    du, dv, ang, volt, cs, w = (_floats(block, c) for c in REQUIRED[3:])
    phase = _floats(block, "_rlnPhaseShift", 0.0)
    ctfs = [CtfParams(*vals) for vals in zip(du, dv, ang, volt, cs, w, phase)]
    labels = None
    if "_rlnClassNumber" in block.columns:
        labels = np.array([int(x) - 1 for x in block.column("_rlnClassNumber")])
    names = block.column("_rlnImageName") if "_rlnImageName" in block.columns else None
    return ParticleMetadata(rotations, t, ctfs, pixel_size, labels, names)


def euler_table(rotations: Sequence[np.ndarray]) -> np.ndarray:
    return np.array([matrix_to_euler(R) for R in rotations])

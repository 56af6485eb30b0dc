"""Backbone torsion manipulation and clash-free linker sampling."""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .atoms import AtomicModel, ModelError

# covalent bonds are detected as atom pairs closer than this in the input model
BOND_CUTOFF = 1.9
_N_HYDROGENS = {"H", "HN", "H1", "H2", "H3"}


@dataclass(frozen=True)
class DihedralSpec:
    """Backbone torsion of one residue.

    ``phi`` rotates about N-CA, ``psi`` about CA-C. The moving set is always
    the C-terminal side: for ``psi`` the residue's carbonyl O (and OXT) plus
    every later residue of the chain; for ``phi`` everything in the residue
    except N, CA and amide hydrogens, plus every later residue.
    """

    chain: str
    residue: int
    name: str = "psi"

    def __post_init__(self):
        if self.name not in ("phi", "psi"):
            raise ModelError(f"dihedral name must be 'phi' or 'psi', got {self.name!r}")


def _torsion_atoms(m: AtomicModel, spec: DihedralSpec) -> tuple[int, int, int, int]:
    c, r = spec.chain, spec.residue
    if spec.name == "phi":
        return (m.atom_index(c, r - 1, "C"), m.atom_index(c, r, "N"),
                m.atom_index(c, r, "CA"), m.atom_index(c, r, "C"))
    return (m.atom_index(c, r, "N"), m.atom_index(c, r, "CA"),
            m.atom_index(c, r, "C"), m.atom_index(c, r + 1, "N"))


def _bond_atoms(m: AtomicModel, spec: DihedralSpec) -> tuple[int, int]:
    c, r = spec.chain, spec.residue
    if spec.name == "phi":
        return m.atom_index(c, r, "N"), m.atom_index(c, r, "CA")
    return m.atom_index(c, r, "CA"), m.atom_index(c, r, "C")


def moving_set(m: AtomicModel, spec: DihedralSpec) -> np.ndarray:
    """Boolean mask of atoms moved by rotating ``spec``."""
    chains = np.array(m.chains)
    in_chain = chains == spec.chain
    own = in_chain & (m.res_seq == spec.residue)
    if not own.any():
        raise ModelError(f"residue {spec.chain}{spec.residue} not found")
    names = np.array(m.names)
    if spec.name == "psi":
        own_moving = own & np.isin(names, ["O", "OXT"])
    else:
        own_moving = own & ~np.isin(names, ["N", "CA"] + sorted(_N_HYDROGENS))
    return own_moving | (in_chain & (m.res_seq > spec.residue))


def dihedral_angle(p0, p1, p2, p3) -> float:
    """IUPAC torsion angle in degrees, range (-180, 180]."""
    b0 = np.asarray(p0) - p1
    b1 = np.asarray(p2) - p1
    b2 = np.asarray(p3) - p2
    b1 = b1 / np.linalg.norm(b1)
    v = b0 - np.dot(b0, b1) * b1
    w = b2 - np.dot(b2, b1) * b1
    x = np.dot(v, w)
    y = np.dot(np.cross(b1, v), w)
    return float(np.degrees(np.arctan2(y, x)))


def measure_dihedral(m: AtomicModel, spec: DihedralSpec) -> float:
    i, j, k, l = _torsion_atoms(m, spec)
    return dihedral_angle(*m.coords[[i, j, k, l]])


def axis_rotation(axis: np.ndarray, angle_deg: float) -> np.ndarray:
    """Right-handed rotation matrix about a unit ``axis`` (Rodrigues)."""
    a = np.radians(angle_deg)
    kx, ky, kz = axis / np.linalg.norm(axis)
    K = np.array([[0, -kz, ky], [kz, 0, -kx], [-ky, kx, 0]])
    return np.eye(3) + np.sin(a) * K + (1 - np.cos(a)) * (K @ K)


def rotate_dihedral(m: AtomicModel, spec: DihedralSpec, angle: float) -> AtomicModel:
    """Rotate the moving set of ``spec`` rigidly by ``angle`` degrees about the
    torsion bond; the torsion angle increases by ``angle``."""
    b, c = _bond_atoms(m, spec)
    move = moving_set(m, spec)
    origin = m.coords[c]
    R = axis_rotation(m.coords[c] - m.coords[b], angle)
    coords = m.coords.copy()
    coords[move] = (coords[move] - origin) @ R.T + origin
    return m.with_coords(coords)


def set_dihedral(m: AtomicModel, spec: DihedralSpec, value: float) -> AtomicModel:
    return rotate_dihedral(m, spec, value - measure_dihedral(m, spec))


def dihedral_sweep(m: AtomicModel, spec: DihedralSpec, n_steps: int, step_deg: float) -> list[AtomicModel]:
    """Conformations rotated by ``0, step, 2*step, ...`` degrees."""
    if n_steps < 1:
        raise ModelError("a dihedral sweep needs at least one conformation")
    return [rotate_dihedral(m, spec, i * step_deg) for i in range(n_steps)]


@dataclass(frozen=True, eq=False)
class RamachandranTable:
    """2-D histogram over (phi, psi) in degrees.

    ``prob[i, j]`` is the probability of the bin
    ``[phi_edges[i], phi_edges[i+1]) x [psi_edges[j], psi_edges[j+1])``.
    """

    phi_edges: np.ndarray
    psi_edges: np.ndarray
    prob: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi_edges, dtype=np.float64)
        psi = np.asarray(self.psi_edges, dtype=np.float64)
        prob = np.asarray(self.prob, dtype=np.float64)
        for e in (phi, psi):
            if e.ndim != 1 or len(e) < 2 or np.any(np.diff(e) <= 0) or e[0] < -180 or e[-1] > 180:
                raise ModelError("bin edges must be increasing within [-180, 180]")
        if prob.shape != (len(phi) - 1, len(psi) - 1):
            raise ModelError(f"probability table shape {prob.shape} does not match the bin edges")
        if np.any(prob < 0) or abs(prob.sum() - 1.0) > 1e-9:
            raise ModelError("bin probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "phi_edges", phi)
        object.__setattr__(self, "psi_edges", psi)
        object.__setattr__(self, "prob", prob)

    @classmethod
    def uniform(cls, nbins: int = 36) -> RamachandranTable:
        edges = np.linspace(-180, 180, nbins + 1)
        return cls(edges, edges, np.full((nbins, nbins), 1.0 / nbins**2))

    def sample(self, rng: np.random.Generator, jitter: bool = False) -> tuple[float, float]:
        """Draw a bin by probability; return its center, or a uniform point in
        it when ``jitter``."""
        flat = rng.choice(self.prob.size, p=self.prob.ravel())
        i, j = np.unravel_index(flat, self.prob.shape)
        lo = np.array([self.phi_edges[i], self.psi_edges[j]])
        hi = np.array([self.phi_edges[i + 1], self.psi_edges[j + 1]])
        val = lo + (hi - lo) * rng.random(2) if jitter else (lo + hi) / 2
        return float(val[0]), float(val[1])


def read_ramachandran(text: str) -> RamachandranTable:
    """Plain-text table::

        # comment
        phi_edges -180 -170 ... 180
        psi_edges -180 -170 ... 180
        <one row of psi-bin probabilities per phi bin>
    """
    phi = psi = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        try:
            if key == "phi_edges":
                phi = [float(x) for x in rest]
            elif key == "psi_edges":
                psi = [float(x) for x in rest]
            else:
                rows.append([float(x) for x in line.split()])
        except ValueError as exc:
            raise ModelError(f"line {lineno}: not a number") from exc
    if phi is None or psi is None:
        raise ModelError("Ramachandran table needs phi_edges and psi_edges lines")
    return RamachandranTable(np.array(phi), np.array(psi), np.array(rows))


def format_ramachandran(t: RamachandranTable) -> str:
    out = ["phi_edges " + " ".join(repr(float(x)) for x in t.phi_edges),
           "psi_edges " + " ".join(repr(float(x)) for x in t.psi_edges)]
    out += [" ".join(repr(float(x)) for x in row) for row in t.prob]
    return "\n".join(out) + "\n"


def _linker_torsions(m: AtomicModel, chain: str, residues: Sequence[int]) -> list[DihedralSpec]:
    specs = []
    for r in residues:
        m.residue_atoms(chain, r)  # raises for a missing residue
        for name in ("phi", "psi"):
            spec = DihedralSpec(chain, r, name)
            try:
                _torsion_atoms(m, spec)
            except ModelError:
                continue  # chain terminus: torsion undefined
            specs.append(spec)
    if not specs:
        raise ModelError("linker has no rotatable backbone torsions")
    return specs


def covalent_pairs(m: AtomicModel, cutoff: float = BOND_CUTOFF) -> set[tuple[int, int]]:
    return {(int(i), int(j)) for i, j in cKDTree(m.coords).query_pairs(cutoff)}


def excluded_pairs(m: AtomicModel, cutoff: float = BOND_CUTOFF) -> set[tuple[int, int]]:
    """Atom pairs one or two covalent bonds apart; their separation is fixed by
    bond lengths and angles, so they never count as clashes."""
    bonds = covalent_pairs(m, cutoff)
    nbrs: dict[int, set[int]] = {}
    for i, j in bonds:
        nbrs.setdefault(i, set()).add(j)
        nbrs.setdefault(j, set()).add(i)
    out = set(bonds)
    for center, partners in nbrs.items():
        for a in partners:
            for b in partners:
                if a < b:
                    out.add((a, b))
    return out


def min_cross_distance(coords: np.ndarray, moved: np.ndarray, excluded: set[tuple[int, int]]) -> float:
    """Smallest distance between a moved and a static atom, skipping ``excluded`` pairs."""
    mi = np.flatnonzero(moved)
    si = np.flatnonzero(~moved)
    tree = cKDTree(coords[si])
    k = min(len(si), 8)
    d, j = tree.query(coords[mi], k=k)
    d = d.reshape(len(mi), k)
    j = si[j.reshape(len(mi), k)]
    best = np.inf
    for row, a in enumerate(mi):
        for dist, b in zip(d[row], j[row]):
            if (min(a, b), max(a, b)) not in excluded:
                best = min(best, dist)
                break
        else:
            # every one of the k nearest is excluded; scan exhaustively
            dists = np.linalg.norm(coords[si] - coords[a], axis=1)
            for col in np.argsort(dists):
                b = si[col]
                if (min(a, b), max(a, b)) not in excluded:
                    best = min(best, dists[col])
                    break
    return float(best)


class RetryBudgetExhausted(ModelError):
    pass


def sample_linker(
    m: AtomicModel,
    chain: str,
    residues: Sequence[int],
    table: RamachandranTable,
    rng: np.random.Generator,
    clash_cutoff: float = 2.0,
    max_attempts: int = 10_000,
    jitter: bool = False,
) -> AtomicModel:
    """Resample the backbone (phi, psi) of the linker ``residues`` of ``chain``.

    Torsions are set residue by residue in the given order. A draw is rejected
    when any atom downstream of the first rotated bond comes within
    ``clash_cutoff`` Angstrom of a static atom. Atoms one or two covalent bonds
    apart in the input are not compared.
    """
    if clash_cutoff <= 0:
        raise ModelError("clash cutoff must be positive")
    specs = _linker_torsions(m, chain, residues)
    plan = []
    for spec in specs:
        plan.append((spec, _torsion_atoms(m, spec), moving_set(m, spec)))
    moved = np.zeros(len(m), bool)
    for _, _, mv in plan:
        moved |= mv
    excluded = excluded_pairs(m)
    by_residue = {}
    for spec, atoms, mv in plan:
        by_residue.setdefault(spec.residue, []).append((spec.name, atoms, mv))

    for _ in range(max_attempts):
        coords = m.coords.copy()
        for r in residues:
            angles = dict(zip(("phi", "psi"), table.sample(rng, jitter)))
            for name, (i, j, k, l), mv in by_residue.get(r, ()):
                delta = angles[name] - dihedral_angle(*coords[[i, j, k, l]])
                R = axis_rotation(coords[k] - coords[j], delta)
                coords[mv] = (coords[mv] - coords[k]) @ R.T + coords[k]
        if min_cross_distance(coords, moved, excluded) >= clash_cutoff:
            return m.with_coords(coords)
    raise RetryBudgetExhausted(f"no clash-free linker conformation in {max_attempts} attempts")

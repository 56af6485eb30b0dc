from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ModelError(ValueError):
    """Invalid atomic model or an operation that cannot be applied to it."""


@dataclass(frozen=True, eq=False)
class AtomicModel:
    """Ordered atoms with per-atom element, name, residue and chain.

    Coordinates are in Angstrom, shape (n, 3), columns x, y, z.
    """

    coords: np.ndarray
    elements: tuple[str, ...]
    names: tuple[str, ...]
    res_names: tuple[str, ...]
    res_seq: np.ndarray
    chains: tuple[str, ...]
    source: str = ""
    hetero: np.ndarray = field(default=None)

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64)
        n = len(coords)
        if n == 0:
            raise ModelError("atomic model has no atoms")
        if coords.shape != (n, 3) or not np.all(np.isfinite(coords)):
            raise ModelError("coordinates must be a finite (n, 3) array")
        res_seq = np.array(self.res_seq, dtype=np.int64)
        for name in ("elements", "names", "res_names", "chains"):
            val = tuple(getattr(self, name))
            if len(val) != n:
                raise ModelError(f"{name} has {len(val)} entries for {n} atoms")
            object.__setattr__(self, name, val)
        if res_seq.shape != (n,):
            raise ModelError("res_seq must have one entry per atom")
        chains = np.array(self.chains)
        for c in np.unique(chains):
            seq = res_seq[chains == c]
            if np.any(np.diff(seq) < 0):
                raise ModelError(f"residue numbers decrease within chain {c!r}")
        hetero = np.zeros(n, bool) if self.hetero is None else np.array(self.hetero, dtype=bool)
        coords.setflags(write=False)
        res_seq.setflags(write=False)
        hetero.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "res_seq", res_seq)
        object.__setattr__(self, "hetero", hetero)

    def __len__(self) -> int:
        return len(self.coords)

    def with_coords(self, coords: np.ndarray) -> AtomicModel:
        return AtomicModel(coords, self.elements, self.names, self.res_names,
                           self.res_seq, self.chains, self.source, self.hetero)

    def atom_index(self, chain: str, res: int, name: str) -> int:
        for i in self.residue_atoms(chain, res):
            if self.names[i] == name:
                return int(i)
        raise ModelError(f"atom {name} missing from residue {chain}{res}")

    def residue_atoms(self, chain: str, res: int) -> np.ndarray:
        idx = np.flatnonzero((np.array(self.chains) == chain) & (self.res_seq == res))
        if idx.size == 0:
            raise ModelError(f"residue {chain}{res} not found")
        return idx

    def center_of_mass(self) -> np.ndarray:
        """Unweighted mean position (atoms are treated as unit masses)."""
        return self.coords.mean(axis=0)

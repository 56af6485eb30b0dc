"""Atomic models, molmap-style density synthesis and conformation generation."""
from .atoms import AtomicModel, ModelError
from .density import SIGMA_FACTOR, synthesize_density
from .dihedral import (
    DihedralSpec,
    RamachandranTable,
    RetryBudgetExhausted,
    dihedral_sweep,
    format_ramachandran,
    measure_dihedral,
    moving_set,
    read_ramachandran,
    rotate_dihedral,
    sample_linker,
    set_dihedral,
)
from .pdb import format_pdb, parse_pdb
from .synthetic import two_blob_model, two_blob_series

__all__ = [
    "AtomicModel", "ModelError", "SIGMA_FACTOR", "synthesize_density", "DihedralSpec",
    "RamachandranTable", "RetryBudgetExhausted", "dihedral_sweep", "format_ramachandran",
    "measure_dihedral", "moving_set", "read_ramachandran", "rotate_dihedral", "sample_linker",
    "set_dihedral", "format_pdb", "parse_pdb", "two_blob_model", "two_blob_series",
]

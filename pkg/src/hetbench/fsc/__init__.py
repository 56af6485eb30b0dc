"""Volume comparison: FSC curves, AUC-FSC tables, representative selection
and alignment."""
from .align import align_volumes, so3_grid, zero_pad
from .curve import FscCurve, FscError, auc_fsc, fsc, fsc_from_spectra, shell_index
from .select import RepresentativeSelection, kmeans_representatives, select_per_conformation
from .table import PAIRINGS, FscPair, FscReport, fsc_table, summarize

__all__ = [
    "align_volumes", "so3_grid", "zero_pad", "FscCurve", "FscError", "auc_fsc", "fsc", "fsc_from_spectra",
    "shell_index", "RepresentativeSelection", "kmeans_representatives", "select_per_conformation",
    "PAIRINGS", "FscPair", "FscReport", "fsc_table", "summarize",
]

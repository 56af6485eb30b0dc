"""Batch FSC evaluation of candidate volumes against ground truths."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..grid import MaskVolume, Volume, check_same_grid, ft
from .curve import FscCurve, FscError, auc_fsc, fsc_from_spectra

PAIRINGS = ("per_conformation", "per_image", "sample_max")


@dataclass(frozen=True)
class FscPair:
    gt: int
    cand: int
    curve: FscCurve
    auc: float


@dataclass(frozen=True)
class FscReport:
    pairing: str
    pairs: tuple[FscPair, ...]
    mean: float
    std: float  # population (ddof=0)
    median: float
    matrix: np.ndarray | None = None  # (n_cand, n_gt) AUCs for sample_max

    @property
    def aucs(self) -> np.ndarray:
        return np.array([p.auc for p in self.pairs])

    def to_tsv(self) -> str:
        rows = ["gt_idx\tcand_idx\tauc"] + [f"{p.gt}\t{p.cand}\t{p.auc!r}" for p in self.pairs]
        return "\n".join(rows) + "\n"

    def summary_text(self) -> str:
        return json.dumps({"pairing": self.pairing, "n": len(self.pairs), "mean": self.mean,
                           "std": self.std, "median": self.median}, indent=2) + "\n"

    def curves_tsv(self) -> str:
        freq = self.pairs[0].curve.shell_freq
        head = ["freq"] + [f"gt{p.gt}_cand{p.cand}" for p in self.pairs]
        rows = ["\t".join(head)]
        for s, f in enumerate(freq):
            rows.append("\t".join([repr(float(f))] + [repr(float(p.curve.correlation[s])) for p in self.pairs]))
        return "\n".join(rows) + "\n"


def summarize(aucs: np.ndarray) -> tuple[float, float, float]:
    return float(np.mean(aucs)), float(np.std(aucs)), float(np.median(aucs))


def _spectra(vols: Sequence[Volume], mask: MaskVolume | None, threads: int) -> list[np.ndarray]:
    def one(v):
        return ft(v.data if mask is None else v.data * mask.data)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        return list(ex.map(one, vols))


def fsc_table(gt_vols: Sequence[Volume], cand_vols: Sequence[Volume], pairing: str = "per_conformation",
              mask: MaskVolume | None = None, pairs: Sequence[int] | None = None,
              threads: int = 1) -> FscReport:
    """AUC-FSC of candidates against ground truths.

    per_conformation  candidate i vs ground truth ``pairs[i]`` (default i)
    per_image         candidate i vs ground truth ``pairs[i]`` (required;
                      usually the image's label)
    sample_max        every candidate vs every ground truth; each candidate
                      keeps its best match
    """
    if pairing not in PAIRINGS:
        raise FscError(f"unknown pairing {pairing!r}; expected one of {', '.join(PAIRINGS)}")
    gt_vols, cand_vols = list(gt_vols), list(cand_vols)
    if not gt_vols or not cand_vols:
        raise FscError("need at least one ground truth and one candidate")
    for v in gt_vols[1:] + cand_vols:
        check_same_grid(gt_vols[0], v, "FSC table volumes")
    if mask is not None:
        check_same_grid(gt_vols[0], mask, "FSC mask")
    fg = _spectra(gt_vols, mask, threads)
    fc = _spectra(cand_vols, mask, threads)

    def curve(ij):
        return fsc_from_spectra(fg[ij[0]], fc[ij[1]])

    if pairing == "sample_max":
        jobs = [(g, c) for c in range(len(fc)) for g in range(len(fg))]
    else:
        if pairs is None:
            if pairing == "per_image":
                raise FscError("per_image pairing needs the ground-truth index of every candidate")
            if len(fc) != len(fg):
                raise FscError(f"{len(fc)} candidates for {len(fg)} ground truths")
            pairs = range(len(fc))
        pairs = [int(p) for p in pairs]
        if len(pairs) != len(fc):
            raise FscError(f"{len(pairs)} pairings for {len(fc)} candidates")
        if min(pairs) < 0 or max(pairs) >= len(fg):
            raise FscError("pairing refers to a missing ground truth")
        jobs = [(g, c) for c, g in enumerate(pairs)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        curves = list(ex.map(curve, jobs))
    aucs = np.array([auc_fsc(c) for c in curves])
    matrix = None
    if pairing == "sample_max":
        matrix = aucs.reshape(len(fc), len(fg))
        best = np.argmax(matrix, axis=1)
        out = tuple(FscPair(int(g), c, curves[c * len(fg) + g], float(matrix[c, g])) for c, g in enumerate(best))
    else:
        out = tuple(FscPair(g, c, cv, float(a)) for (g, c), cv, a in zip(jobs, curves, aucs))
    mean, std, median = summarize(np.array([p.auc for p in out]))
    return FscReport(pairing, out, mean, std, median, matrix)

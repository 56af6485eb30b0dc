"""Representative latent coordinates for per-conformation and sample FSC."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..embed import EmbeddingError, as_embedding, kmeans, nearest_rows


@dataclass(frozen=True)
class RepresentativeSelection:
    labels: np.ndarray  # distinct ground-truth labels, ascending
    means: np.ndarray  # per-label mean embedding
    indices: np.ndarray  # chosen dataset row per label
    coords: np.ndarray  # embedding of the chosen rows
    scope: str


def select_per_conformation(emb, labels, scope: str = "label") -> RepresentativeSelection:
    """For each label, the row nearest the mean embedding of that label.

    ``scope="label"`` searches the label's own rows, ``"all"`` the whole
    dataset. Ties resolve to the lowest row index.
    """
    x = as_embedding(emb).rows
    labels = np.asarray(labels)
    if labels.shape != (len(x),):
        raise EmbeddingError(f"{len(labels)} labels for {len(x)} rows")
    if scope not in ("label", "all"):
        raise EmbeddingError(f"unknown scope {scope!r}")
    uniq = np.unique(labels)
    means = np.empty((len(uniq), x.shape[1]))
    chosen = np.empty(len(uniq), dtype=np.int64)
    for t, lab in enumerate(uniq):
        rows = np.flatnonzero(labels == lab)
        means[t] = x[rows].mean(axis=0)
        pool = rows if scope == "label" else np.arange(len(x))
        d = cdist(means[t][None], x[pool], "sqeuclidean")[0]
        chosen[t] = pool[int(np.argmin(d))]
    return RepresentativeSelection(uniq, means, chosen, x[chosen].copy(), scope)


def kmeans_representatives(emb, k: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Run k-means and return (row index nearest each centroid, centroids)."""
    x = as_embedding(emb).rows
    res = kmeans(x, k, seed)
    return nearest_rows(x, res.centroids), res.centroids

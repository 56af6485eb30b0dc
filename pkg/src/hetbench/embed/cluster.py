"""k-means (k-means++ seeding, Lloyd iterations) and clustering agreement
scores (adjusted Rand index, adjusted mutual information)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import gammaln

from .matrix import EmbeddingError, as_embedding

MAX_ITER = 300
TOL = 1e-6


class KMeansError(EmbeddingError):
    pass


@dataclass(frozen=True)
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: np.ndarray  # within-cluster sum of squares after each assignment
    n_iter: int
    converged: bool


def _sqdist(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    d = (x * x).sum(1)[:, None] - 2 * x @ c.T + (c * c).sum(1)[None, :]
    return np.maximum(d, 0.0)


def kmeans_plus_plus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centers = [int(rng.integers(n))]
    d2 = _sqdist(x, x[centers])[:, 0]
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            j = int(rng.choice(n, p=d2 / total))
        else:
            j = int(rng.integers(n))
        centers.append(j)
        d2 = np.minimum(d2, _sqdist(x, x[[j]])[:, 0])
    return x[centers].copy()


def kmeans(x, k: int, seed: int = 0, max_iter: int = MAX_ITER, tol: float = TOL) -> KMeansResult:
    """Lloyd's algorithm from a k-means++ start.

    Stops when no centroid moves more than ``tol`` or after ``max_iter``
    iterations. A cluster that empties is re-seeded once at the point farthest
    from its centroid; a second empty cluster raises :class:`KMeansError`.
    Ties in assignment go to the lowest centroid index.
    """
    x = as_embedding(x).rows
    n = len(x)
    if not 1 <= k <= n:
        raise KMeansError(f"k must lie in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    c = kmeans_plus_plus(x, k, rng)
    reseeded = False
    inertia = []
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        d = _sqdist(x, c)
        lab = np.argmin(d, axis=1)
        dmin = d[np.arange(n), lab]
        inertia.append(float(dmin.sum()))
        counts = np.bincount(lab, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            if reseeded:
                raise KMeansError("k-means produced an empty cluster twice")
            reseeded = True
            far = np.argsort(-dmin, kind="stable")
            for e, j in zip(empty, far):
                c[e] = x[j]
            continue
        new = np.zeros_like(c)
        np.add.at(new, lab, x)
        new /= counts[:, None]
        shift = np.sqrt(((new - c) ** 2).sum(1)).max()
        c = new
        if shift < tol:
            converged = True
            break
    d = _sqdist(x, c)
    lab = np.argmin(d, axis=1)
    return KMeansResult(c, lab, np.array(inertia), it, converged)


def kmeans_labels(emb, k: int, seed: int = 0) -> np.ndarray:
    return kmeans(emb, k, seed).labels


def nearest_rows(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Index of the data row nearest each center (lowest index on ties)."""
    return np.argmin(cdist(x, centers, "sqeuclidean"), axis=0)


def _codes(x: np.ndarray) -> tuple[np.ndarray, int]:
    if x.dtype.kind in "iub" and x.size and x.min() >= 0 and x.max() < 4 * x.size + 64:
        return x.astype(np.int64), int(x.max()) + 1
    _, inv = np.unique(x, return_inverse=True)
    return inv.ravel(), int(inv.max()) + 1


def contingency(a, b) -> np.ndarray:
    """Counts table of label pairs; classes that never occur are dropped."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise EmbeddingError(f"label vectors differ in shape: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise EmbeddingError("label vectors are empty")
    ia, na = _codes(a)
    ib, nb = _codes(b)
    m = np.bincount(ia * nb + ib, minlength=na * nb).reshape(na, nb)
    return m[m.sum(1) > 0][:, m.sum(0) > 0]


def _comb2(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2


def adjusted_rand_index(pred, truth) -> float:
    m = contingency(pred, truth)
    n = m.sum()
    index = _comb2(m).sum()
    sa, sb = _comb2(m.sum(1)).sum(), _comb2(m.sum(0)).sum()
    expected = sa * sb / _comb2(n) if n > 1 else 0.0
    top = 0.5 * (sa + sb)
    if top == expected:  # both partitions trivial and identical
        return 1.0
    return float((index - expected) / (top - expected))


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def mutual_information(m: np.ndarray) -> float:
    n = m.sum()
    a, b = m.sum(1), m.sum(0)
    i, j = np.nonzero(m)
    nij = m[i, j].astype(float)
    return float((nij / n * (np.log(nij * n) - np.log(a[i] * b[j].astype(float)))).sum())


def expected_mutual_information(m: np.ndarray) -> float:
    """E[MI] under the hypergeometric permutation model with fixed marginals."""
    n = int(m.sum())
    a, b = m.sum(1).astype(int), m.sum(0).astype(int)
    lg = gammaln(np.arange(n + 2) + 1.0)  # lg[x] = log(x!)
    total = 0.0
    for ai in a:
        for bj in b:
            lo, hi = max(1, ai + bj - n), min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1)
            term = nij / n * (np.log(n * nij) - np.log(ai * bj))
            logp = (lg[ai] + lg[bj] + lg[n - ai] + lg[n - bj] - lg[n]
                    - lg[nij] - lg[ai - nij] - lg[bj - nij] - lg[n - ai - bj + nij])
            total += float((term * np.exp(logp)).sum())
    return total


def adjusted_mutual_info(pred, truth) -> float:
    """AMI with arithmetic-mean entropy normalization."""
    m = contingency(pred, truth)
    r, c = m.shape
    n = m.sum()
    if (r == c == 1) or (r == c == n):
        return 1.0
    mi = mutual_information(m)
    emi = expected_mutual_information(m)
    norm = 0.5 * (_entropy(m.sum(1)) + _entropy(m.sum(0)))
    denom = norm - emi
    eps = np.finfo(float).eps
    denom = min(denom, -eps) if denom < 0 else max(denom, eps)
    return float((mi - emi) / denom)


def clustering_scores(pred, truth) -> tuple[float, float]:
    return adjusted_rand_index(pred, truth), adjusted_mutual_info(pred, truth)

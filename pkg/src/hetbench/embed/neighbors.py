"""Neighbourhood statistics: percentage of matching neighbours and
information imbalance.

Both rank neighbours by Euclidean distance with ties broken by row index
(lower index ranks first). pMN neighbourhoods contain the query point itself,
so a radius equal to the whole subset always scores 100%. Information
imbalance ranks start at 1 for the nearest point other than the query.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .matrix import EmbeddingError, EmbeddingMatrix, as_embedding

_CHUNK_ELEMENTS = 4_000_000


def neighbor_order(x: np.ndarray, rows: slice | np.ndarray | None = None) -> np.ndarray:
    """For each query row, all points sorted by distance, the query first."""
    q = x if rows is None else x[rows]
    d = cdist(q, x, "sqeuclidean")
    idx = np.arange(len(x))[rows] if rows is not None else np.arange(len(x))
    d[np.arange(len(q)), idx] = -1.0
    return np.argsort(d, axis=1, kind="stable")


def rank_matrix(x: np.ndarray, rows=None) -> np.ndarray:
    """``r[i, j]`` = position of j in i's neighbour order (the query is 0)."""
    order = neighbor_order(x, rows)
    r = np.empty_like(order)
    np.put_along_axis(r, order, np.arange(order.shape[1])[None, :], axis=1)
    return r


def _chunks(n: int):
    step = max(1, _CHUNK_ELEMENTS // max(n, 1))
    for lo in range(0, n, step):
        yield slice(lo, min(n, lo + step))


@dataclass(frozen=True)
class PmnCurve:
    radii: np.ndarray  # percent of subset size
    k: np.ndarray  # neighbourhood sizes per radius
    mean: np.ndarray
    std: np.ndarray  # across splits, ddof=0
    sem: np.ndarray  # std (ddof=1) / sqrt(n_splits); 0 for a single split
    per_split: np.ndarray  # (n_splits, len(radii))
    n_splits: int
    subset_size: int


def matching_counts(a: np.ndarray, b: np.ndarray, ks) -> np.ndarray:
    """Total over points of |kNN_a(i) & kNN_b(i)| for each k (self included)."""
    m = len(a)
    hist = np.zeros(m, dtype=np.int64)
    for sl in _chunks(m):
        joint = np.maximum(rank_matrix(a, sl), rank_matrix(b, sl))
        hist += np.bincount(joint.ravel(), minlength=m)
    cum = np.cumsum(hist)
    return np.array([cum[k - 1] for k in ks])


def pmn_radii(n_structures: int, subset_size: int) -> tuple[np.ndarray, np.ndarray]:
    n = np.arange(1, n_structures + 1)
    k = np.maximum(1, (n * subset_size) // n_structures)
    return 100.0 * n / n_structures, k


def pmn_curve(emb, gt, n_structures: int, n_splits: int = 5, ks=None) -> PmnCurve:
    """pMN(k) = 100 / (k m) * sum_i |NN_k(i) & gt_k(i)| within each split.

    Splits are strided (rows s, s + n_splits, ...), each truncated to
    ``N // n_splits`` rows; the remainder is dropped. Radii follow
    ``k = n * m / n_structures`` for n = 1..n_structures (floored), unless an
    explicit ``ks`` list is given.
    """
    emb, gt = as_embedding(emb), as_embedding(gt)
    N = emb.N
    if gt.N != N:
        raise EmbeddingError(f"embeddings differ in length: {N} vs {gt.N}")
    if n_splits < 1 or N < n_splits:
        raise EmbeddingError(f"cannot split {N} rows into {n_splits} sets")
    if n_structures < 1:
        raise EmbeddingError("n_structures must be positive")
    m = N // n_splits
    if ks is None:
        radii, k = pmn_radii(n_structures, m)
    else:
        k = np.asarray(ks, dtype=int)
        radii = 100.0 * k / m
    if np.any(k < 1) or np.any(k > m):
        raise EmbeddingError(f"neighbourhood sizes must lie in [1, {m}]")
    per = np.empty((n_splits, len(k)))
    for s in range(n_splits):
        idx = np.arange(s, N, n_splits)[:m]
        per[s] = 100.0 * matching_counts(emb.rows[idx], gt.rows[idx], k) / (k * m)
    sem = per.std(axis=0, ddof=1) / np.sqrt(n_splits) if n_splits > 1 else np.zeros(len(k))
    return PmnCurve(radii, k, per.mean(axis=0), per.std(axis=0), sem, per, n_splits, m)


@dataclass(frozen=True)
class ImbalanceResult:
    delta_ab: float  # mean over k_list
    delta_ba: float
    std_ab: float  # std across k_list, ddof=0
    std_ba: float
    per_k_ab: np.ndarray
    per_k_ba: np.ndarray
    k_list: tuple[int, ...]
    subset_size: int
    subset: np.ndarray  # row indices used


def _imbalance_sums(ra: np.ndarray, rb: np.ndarray, kmax: int) -> np.ndarray:
    """Cumulative sums over the first kmax A-neighbours of their B-ranks."""
    n = ra.shape[0]
    order_a = np.argsort(ra, axis=1)[:, 1:kmax + 1]  # rank 1..kmax, self skipped
    rb_at = np.take_along_axis(rb, order_a, axis=1)
    return np.cumsum(rb_at.sum(axis=0))  # index k-1 -> sum over r^A <= k


def information_imbalance(a, b, k_list=(1, 3, 10, 30), subset_size: int = 2000,
                          rng: np.random.Generator | int | None = 0) -> ImbalanceResult:
    """Delta(A -> B; k) = 2 / (n^2 k) * sum_{i, j: r^A_ij <= k} r^B_ij.

    Ranks are computed within a uniform random subset of ``subset_size`` rows
    (drawn without replacement, then sorted so ties resolve by original row
    index). For k = 1 this is 2 <r^B> / n where the mean is over each point's
    nearest A-neighbour; it is 2/n when A and B coincide and about 1 when they
    are independent.
    """
    a, b = as_embedding(a), as_embedding(b)
    N = a.N
    if b.N != N:
        raise EmbeddingError(f"embeddings differ in length: {N} vs {b.N}")
    k_list = tuple(int(k) for k in k_list)
    if not k_list or min(k_list) < 1:
        raise EmbeddingError("k_list must hold positive integers")
    if not max(k_list) < subset_size <= N:
        raise EmbeddingError(f"need max(k_list) < subset_size <= N, got {max(k_list)}, {subset_size}, {N}")
    rng = np.random.default_rng(rng)
    subset = np.sort(rng.choice(N, subset_size, replace=False)) if subset_size < N else np.arange(N)
    n = subset_size
    ra = rank_matrix(a.rows[subset])
    rb = rank_matrix(b.rows[subset])
    kmax = max(k_list)
    cab = _imbalance_sums(ra, rb, kmax)
    cba = _imbalance_sums(rb, ra, kmax)
    ks = np.array(k_list)
    ab = 2.0 * cab[ks - 1] / (n * n * ks)
    ba = 2.0 * cba[ks - 1] / (n * n * ks)
    return ImbalanceResult(float(ab.mean()), float(ba.mean()), float(ab.std()), float(ba.std()),
                           ab, ba, k_list, n, subset)

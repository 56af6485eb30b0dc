"""Embedding metrics: ground-truth embeddings, neighbourhood similarity,
information imbalance and clustering agreement."""
from .cluster import (
    KMeansError,
    KMeansResult,
    adjusted_mutual_info,
    adjusted_rand_index,
    clustering_scores,
    contingency,
    kmeans,
    kmeans_labels,
    nearest_rows,
)
from .gt import KINDS, gt_embedding, smear
from .matrix import (
    EmbeddingError,
    EmbeddingMatrix,
    as_embedding,
    format_embedding_tsv,
    read_embedding_binary,
    read_embedding_tsv,
    read_labels,
    write_embedding_binary,
)
from .neighbors import ImbalanceResult, PmnCurve, information_imbalance, pmn_curve, rank_matrix

__all__ = [
    "KMeansError", "KMeansResult", "adjusted_mutual_info", "adjusted_rand_index", "clustering_scores",
    "contingency", "kmeans", "kmeans_labels", "nearest_rows", "KINDS", "gt_embedding", "smear",
    "EmbeddingError", "EmbeddingMatrix", "as_embedding", "format_embedding_tsv", "read_embedding_binary",
    "read_embedding_tsv", "read_labels", "write_embedding_binary", "ImbalanceResult", "PmnCurve",
    "information_imbalance", "pmn_curve", "rank_matrix",
]

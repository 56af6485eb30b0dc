"""Embedding container and its two on-disk formats.

TSV: optional header line starting with ``#`` or non-numeric labels, then one
tab-separated row of floats per image.

Binary: a 16-byte little-endian header ``magic (4 bytes b"HBEM") | dtype code
(uint32: 1 = float64, 2 = float32) | N (uint32) | d (uint32)`` followed by the
row-major N x d payload.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"HBEM"
DTYPE_CODES = {1: np.dtype("<f8"), 2: np.dtype("<f4")}


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """N x d embedding with a provenance tag.

    ``kind`` is ``"method"`` for a method's output or the name of the
    ground-truth construction. ``raw`` keeps the pre-transform variables of
    ground-truth kinds (for instance angles in degrees before sin/cos) so that
    :func:`smear` can perturb them.
    """

    rows: np.ndarray
    kind: str = "method"
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.array(self.rows, dtype=np.float64)
        if a.ndim == 1:
            a = a[:, None]
        if a.ndim != 2:
            raise EmbeddingError(f"embedding must be 2-D, got shape {a.shape}")
        if a.shape[0] < 2 or a.shape[1] < 1:
            raise EmbeddingError(f"embedding needs N >= 2 rows and d >= 1 columns, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise EmbeddingError("embedding contains non-finite values")
        a.setflags(write=False)
        object.__setattr__(self, "rows", a)

    @property
    def N(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.N

    def subset(self, idx) -> EmbeddingMatrix:
        raw = {k: np.asarray(v)[idx] for k, v in self.raw.items()}
        return EmbeddingMatrix(self.rows[idx], self.kind, raw)


def as_embedding(x) -> EmbeddingMatrix:
    return x if isinstance(x, EmbeddingMatrix) else EmbeddingMatrix(x)


def read_embedding_tsv(text: str) -> EmbeddingMatrix:
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.strip().split("\t")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            if not rows and width is None:
                width = len(parts)  # header line
                continue
            raise EmbeddingError(f"line {lineno}: non-numeric field") from None
        if width is None:
            width = len(vals)
        if len(vals) != width:
            raise EmbeddingError(f"line {lineno}: {len(vals)} fields, expected {width}")
        rows.append(vals)
    if not rows:
        raise EmbeddingError("no embedding rows found")
    return EmbeddingMatrix(np.array(rows))


def format_embedding_tsv(emb: EmbeddingMatrix, header: bool = True) -> str:
    out = []
    if header:
        out.append("\t".join(f"z{j}" for j in range(emb.d)))
    out += ["\t".join(repr(float(x)) for x in row) for row in emb.rows]
    return "\n".join(out) + "\n"


def write_embedding_binary(emb: EmbeddingMatrix, dtype_code: int = 1) -> bytes:
    if dtype_code not in DTYPE_CODES:
        raise EmbeddingError(f"unknown dtype code {dtype_code}")
    head = MAGIC + struct.pack("<III", dtype_code, emb.N, emb.d)
    return head + np.ascontiguousarray(emb.rows, dtype=DTYPE_CODES[dtype_code]).tobytes()


def read_embedding_binary(raw: bytes) -> EmbeddingMatrix:
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise EmbeddingError("not an embedding container (bad magic)")
    code, n, d = struct.unpack("<III", raw[4:16])
    if code not in DTYPE_CODES:
        raise EmbeddingError(f"unknown dtype code {code}")
    dt = DTYPE_CODES[code]
    if len(raw) != 16 + n * d * dt.itemsize:
        raise EmbeddingError(f"payload is {len(raw) - 16} bytes, header implies {n * d * dt.itemsize}")
    return EmbeddingMatrix(np.frombuffer(raw, dtype=dt, offset=16).reshape(n, d))


def read_labels(text: str) -> np.ndarray:
    """One integer per line; an optional non-numeric header line is skipped."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            out.append(int(s.split("\t")[0]))
        except ValueError:
            if out:
                raise EmbeddingError(f"line {lineno}: not an integer label") from None
    if not out:
        raise EmbeddingError("no labels found")
    return np.array(out)

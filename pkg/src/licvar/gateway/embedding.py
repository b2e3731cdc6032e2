"""Text embedding backends."""

from __future__ import annotations

import logging
import math
from typing import Protocol, Sequence

import numpy as np

from licvar import _kernels
from licvar.errors import BackendError
from licvar.fingerprint import normalized

log = logging.getLogger(__name__)


class EmbeddingBackend(Protocol):
    name: str
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...


class NgramEmbedder:
    """Hashed character n-gram term frequencies, L2-normalized.

    Works on the normalized form of the text, so layout and case do not
    matter. An empty text embeds to the zero vector.
    """

    def __init__(self, n: int = 3, dimension: int = 1024):
        if n < 1 or dimension < 1:
            raise ValueError("n and dimension must be positive")
        self.n = n
        self.dimension = dimension
        self.name = f"ngram{n}-{dimension}"

    def embed(self, text: str) -> np.ndarray:
        counts = np.asarray(
            _kernels.ngram_counts(normalized(text), self.n, self.dimension), dtype=np.float64
        )
        norm = math.sqrt(float(counts @ counts))
        if norm == 0.0:
            return counts
        return counts / norm

    def embed_many(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dimension))
        return np.vstack([self.embed(t) for t in texts])


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise BackendError(f"embedding dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def embedding_backend(name: str) -> EmbeddingBackend:
    """Instantiate a built-in backend from its identifier (``ngram3-1024``)."""
    if name.startswith("ngram"):
        try:
            n_part, dim_part = name[len("ngram") :].split("-", 1)
            return NgramEmbedder(int(n_part), int(dim_part))
        except ValueError:
            pass
    raise BackendError(f"unknown embedding backend {name!r}")

"""Text embedders used by name clustering and entity dedup.

Callers only need `similarity(a, b)`; the vector-backed implementations
memoize embeddings so N names cost at most N vector computations.
"""

from __future__ import annotations

import hashlib
from typing import Protocol

import numpy as np


class EmbeddingProvider(Protocol):
    def embed(self, text: str):  # unit vector (implementation-defined type)
        ...

    def similarity(self, a: str, b: str) -> float:  # cosine, in [-1, 1]
        ...


class CachedVectorEmbedder:
    """Base class: memoized embed(), similarity as a dot of unit vectors."""

    def __init__(self) -> None:
        self._cache: dict[str, np.ndarray] = {}
        self.vector_computations = 0

    def _vector(self, text: str) -> np.ndarray:
        raise NotImplementedError

    def embed(self, text: str) -> np.ndarray:
        vec = self._cache.get(text)
        if vec is None:
            self.vector_computations += 1
            vec = np.asarray(self._vector(text), dtype=np.float64)
            norm = float(np.linalg.norm(vec))
            if norm > 0.0:
                vec = vec / norm
            self._cache[text] = vec
        return vec

    def similarity(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        return float(np.dot(self.embed(a), self.embed(b)))


class HashingEmbedder(CachedVectorEmbedder):
    """Character-trigram hashing embedder.

    Deterministic across processes: bucket and sign come from blake2b, not
    the builtin hash(), so PYTHONHASHSEED has no effect. Cheap and honest
    about what it is; near-identical strings score high, unrelated ones
    rarely clear clustering thresholds.
    """

    def __init__(self, dim: int = 256) -> None:
        super().__init__()
        if dim < 2:
            raise ValueError("dim must be at least 2")
        self.dim = dim

    def _vector(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        padded = f"\x02{text.lower()}\x03"
        if len(padded) < 3:
            padded = padded + "\x03"
        for i in range(len(padded) - 2):
            gram = padded[i : i + 3].encode("utf-8")
            digest = hashlib.blake2b(gram, digest_size=9).digest()
            bucket = int.from_bytes(digest[:8], "big") % self.dim
            sign = 1.0 if digest[8] & 1 else -1.0
            vec[bucket] += sign
        if not vec.any():
            vec[0] = 1.0
        return vec


class ScriptedSimilarityEmbedder:
    """Similarity from an explicit pair table; for tests and demos.

    Self-similarity is 1.0 and the table is symmetrized on construction.
    Unlisted pairs score 0.0, or defer to a fallback embedder when one
    is given (so a demo can pin a few pairs and hash the rest).
    """

    def __init__(
        self,
        pairs: dict[tuple[str, str], float] | None = None,
        fallback: "EmbeddingProvider | None" = None,
    ) -> None:
        self._table: dict[tuple[str, str], float] = {}
        self._fallback = fallback
        for (a, b), sim in (pairs or {}).items():
            self.set(a, b, sim)

    def set(self, a: str, b: str, sim: float) -> None:
        self._table[(a, b)] = sim
        self._table[(b, a)] = sim

    def embed(self, text: str) -> np.ndarray:
        if self._fallback is not None:
            return self._fallback.embed(text)
        return np.ones(1, dtype=np.float64)

    def similarity(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        hit = self._table.get((a, b))
        if hit is not None:
            return hit
        if self._fallback is not None:
            return self._fallback.similarity(a, b)
        return 0.0

"""Algebra of dense bipolar hypervectors.

Vectors are plain numpy arrays.  Bipolar vectors hold +1/-1 components in
int8; bundling produces integer accumulators (int64) that are deliberately
never thresholded back to +1/-1, since cosine similarity is scale
invariant and keeping the counts avoids a lossy majority step.

Operations:
    random_bipolar      seeded i.i.d. +1/-1 vectors
    bind                component-wise product (self-inverse on bipolar)
    bundle              component-wise integer sum
    permute             cyclic right rotation
    cosine_similarity   angular similarity, errors on all-zero input
    hamming_distance    differing-component count for bipolar vectors
"""

import numpy as np

from .common import make_rng

BIPOLAR_DTYPE = np.int8
ACCUMULATOR_DTYPE = np.int64

__all__ = [
    "BIPOLAR_DTYPE",
    "ACCUMULATOR_DTYPE",
    "UndefinedSimilarityError",
    "random_bipolar",
    "bind",
    "bundle",
    "permute",
    "cosine_similarity",
    "hamming_distance",
    "is_bipolar",
]


class UndefinedSimilarityError(ValueError):
    """Cosine similarity was requested for an all-zero vector."""


def random_bipolar(seed: int, count: int, dimension: int) -> np.ndarray:
    """Draw ``count`` independent bipolar vectors of the given dimension.

    Each component is an independent equiprobable +1/-1.  Returns an
    int8 array of shape (count, dimension); rows are the vectors, drawn
    vector by vector with components in ascending index order.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    if dimension < 1:
        raise ValueError(f"dimension must be at least 1, got {dimension}")
    rng = make_rng(seed)
    bits = rng.integers(0, 2, size=(count, dimension), dtype=BIPOLAR_DTYPE)
    return bits * 2 - 1


def bind(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Component-wise product of two equal-dimension vectors."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a * b


def bundle(vectors) -> np.ndarray:
    """Component-wise integer sum of one or more equal-dimension vectors.

    The result is an int64 accumulator and is not sign-thresholded.
    """
    vectors = [np.asarray(v) for v in vectors]
    if not vectors:
        raise ValueError("bundle needs at least one vector")
    first = vectors[0].shape
    for v in vectors[1:]:
        if v.shape != first:
            raise ValueError(f"dimension mismatch: {first} vs {v.shape}")
    return np.sum(np.stack(vectors), axis=0, dtype=ACCUMULATOR_DTYPE)


def permute(a: np.ndarray, k: int = 1) -> np.ndarray:
    """Cyclic right rotation of ``a`` by ``k`` positions.

    ``k`` may be zero, negative, or exceed the dimension; it acts modulo
    the dimension. permute(a, 1) sends component i to position i + 1.
    """
    return np.roll(np.asarray(a), int(k))


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, in [-1, 1].

    Raises UndefinedSimilarityError when either vector is all zeros.
    """
    af = np.asarray(a, dtype=np.float64)
    bf = np.asarray(b, dtype=np.float64)
    if af.shape != bf.shape:
        raise ValueError(f"dimension mismatch: {af.shape} vs {bf.shape}")
    na = np.sqrt(af @ af)
    nb = np.sqrt(bf @ bf)
    if na == 0.0 or nb == 0.0:
        raise UndefinedSimilarityError("cosine similarity of an all-zero vector is undefined")
    return float((af @ bf) / (na * nb))


def hamming_distance(a: np.ndarray, b: np.ndarray) -> int:
    """Number of differing components between two bipolar vectors."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not (is_bipolar(a) and is_bipolar(b)):
        raise ValueError("hamming distance is defined for bipolar vectors only")
    return int(np.count_nonzero(a != b))


def is_bipolar(a: np.ndarray) -> bool:
    """True when every component of ``a`` is +1 or -1."""
    a = np.asarray(a)
    if not np.issubdtype(a.dtype, np.integer):
        return False
    return bool(np.all(np.abs(a) == 1))

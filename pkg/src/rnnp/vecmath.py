"""Dense float64 vector math used by every other module.

A feature vector is a 1-D float64 numpy array; a stack of vectors is a 2-D
array with one vector per row. Everything here is a pure function with a
fixed accumulation order, so results are reproducible and safe to compute
from any number of concurrent workers.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateInputError, InvalidInputError

# Signature alias: a 1-D float64 array of embedding coordinates.
FeatureVec = np.ndarray

VALID_METRICS = ("sqeuclidean", "cosine")


def as_vector(values) -> FeatureVec:
    """Coerce input to a finite 1-D float64 array.

    Raises:
        InvalidInputError: empty, non-1-D, or non-finite input.
    """
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1 or vec.size == 0:
        raise InvalidInputError(f"expected a non-empty 1-D vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise InvalidInputError("vector contains NaN or Inf")
    return vec


def as_matrix(vectors) -> np.ndarray:
    """Stack vectors into a finite 2-D float64 array, one row per vector."""
    mat = np.asarray(vectors, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] == 0 or mat.shape[1] == 0:
        raise InvalidInputError(f"expected a non-empty 2-D stack of vectors, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise InvalidInputError("matrix contains NaN or Inf")
    return mat


def squared_euclidean(a, b) -> float:
    """Squared Euclidean distance between two vectors of equal dimension.

    Symmetric, non-negative, and exactly zero iff the inputs are equal
    (computed as a sum of squared coordinate differences, so no
    cancellation can produce a negative value).
    """
    va = as_vector(a)
    vb = as_vector(b)
    if va.shape != vb.shape:
        raise InvalidInputError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    diff = va - vb
    return float(np.dot(diff, diff))


def cosine_distance(a, b) -> float:
    """1 minus cosine similarity. A zero-norm vector has similarity 0 to everything."""
    va = as_vector(a)
    vb = as_vector(b)
    if va.shape != vb.shape:
        raise InvalidInputError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    na = np.sqrt(np.dot(va, va))
    nb = np.sqrt(np.dot(vb, vb))
    if na == 0.0 or nb == 0.0:
        return 1.0
    return float(1.0 - np.dot(va, vb) / (na * nb))


def _pairwise_raw(r: np.ndarray, c: np.ndarray, metric: str) -> np.ndarray:
    """pairwise_distances without input validation; hot-loop entry point."""
    if metric == "sqeuclidean":
        diff = r[:, None, :] - c[None, :, :]
        return np.einsum("mnd,mnd->mn", diff, diff)
    if metric == "cosine":
        rn = np.sqrt(np.einsum("md,md->m", r, r))
        cn = np.sqrt(np.einsum("nd,nd->n", c, c))
        # Zero-norm vectors get similarity 0 rather than NaN.
        rs = np.where(rn > 0.0, rn, 1.0)
        cs = np.where(cn > 0.0, cn, 1.0)
        sims = (r / rs[:, None]) @ (c / cs[:, None]).T
        sims[rn == 0.0, :] = 0.0
        sims[:, cn == 0.0] = 0.0
        return 1.0 - sims
    raise InvalidInputError(f"unknown metric {metric!r}; expected one of {VALID_METRICS}")


def pairwise_distances(rows, centers, metric: str = "sqeuclidean") -> np.ndarray:
    """Distance from every row vector to every center.

    Args:
        rows: (m, d) stack of vectors.
        centers: (n, d) stack of vectors.
        metric: "sqeuclidean" or "cosine".

    Returns:
        (m, n) float64 array of distances.

    The squared-Euclidean path sums squared coordinate differences
    directly (no expanded dot-product identity), so entries are exactly
    non-negative and exactly zero for identical vectors.
    """
    r = as_matrix(rows)
    c = as_matrix(centers)
    if r.shape[1] != c.shape[1]:
        raise InvalidInputError(f"dimension mismatch: {r.shape[1]} vs {c.shape[1]}")
    return _pairwise_raw(r, c, metric)


def _softmax_raw(s: np.ndarray) -> np.ndarray:
    """softmax without input validation; hot-loop entry point."""
    shifted = s - s.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax(scores) -> np.ndarray:
    """Row-wise softmax with max-subtraction for numerical stability.

    Accepts a 1-D vector or a 2-D array (softmax over the last axis).
    Subtracting the row maximum leaves the result unchanged in exact
    arithmetic and prevents underflow of every term at once when the
    scores are large negative numbers.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim not in (1, 2) or s.size == 0:
        raise InvalidInputError(f"expected a non-empty 1-D or 2-D score array, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise InvalidInputError("scores contain NaN or Inf")
    return _softmax_raw(s)


def weighted_mean(vectors, weights) -> FeatureVec:
    """Weighted mean (sum of w_i * v_i) / (sum of w_i) of a stack of vectors.

    Invariant to uniform positive rescaling of the weights.

    Raises:
        DegenerateInputError: empty input or non-positive total weight.
        InvalidInputError: length mismatch or a negative weight.
    """
    if hasattr(vectors, "__len__") and len(vectors) == 0:
        raise DegenerateInputError("weighted_mean of an empty vector list")
    mat = as_matrix(vectors)
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != mat.shape[0]:
        raise InvalidInputError(f"expected {mat.shape[0]} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InvalidInputError("weights contain NaN or Inf")
    if np.any(w < 0.0):
        raise InvalidInputError("weights must be non-negative")
    total = w.sum()
    if total <= 0.0:
        raise DegenerateInputError("total weight is zero")
    return (w @ mat) / total

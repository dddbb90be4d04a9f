"""Input-validation helpers used by the estimators and functional API."""

from __future__ import annotations

import numpy as np


def check_counts_matrix(counts, *, min_items: int = 0) -> np.ndarray:
    """Validate and return a square matrix of nonnegative integer counts.

    Accepts anything array-like; returns a C-contiguous int64 copy with a
    zero diagonal enforced as an invariant (nonzero diagonal raises).
    """
    arr = np.asarray(counts)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"counts must be a square matrix, got shape {arr.shape}")
    if arr.shape[0] < min_items:
        raise ValueError(f"need at least {min_items} items, got {arr.shape[0]}")
    if not np.isfinite(arr.astype(float)).all():
        raise ValueError("counts must be finite")
    if np.any(arr < 0):
        raise ValueError("counts must be nonnegative")
    as_int = arr.astype(np.int64)
    if not np.array_equal(as_int, arr):
        raise ValueError("counts must be integers")
    if np.any(np.diag(as_int) != 0):
        raise ValueError("diagonal entries must be zero")
    return np.ascontiguousarray(as_int)


def check_scores(scores, n: int | None = None) -> np.ndarray:
    """Validate and return a finite 1-D float score vector."""
    s = np.asarray(scores, dtype=float)
    if s.ndim != 1:
        raise ValueError(f"scores must be a 1-D vector, got shape {s.shape}")
    if n is not None and s.shape[0] != n:
        raise ValueError(f"expected {n} scores, got {s.shape[0]}")
    if not np.isfinite(s).all():
        raise ValueError("scores must be finite")
    return s


def check_pair(i: int, j: int, n: int) -> tuple[int, int]:
    """Validate a pair of distinct item indices."""
    i, j = int(i), int(j)
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"pair ({i}, {j}) out of range for {n} items")
    if i == j:
        raise ValueError(f"pair indices must differ, got ({i}, {j})")
    return i, j


def check_finite_scalar(value, name: str) -> float:
    v = float(value)
    if not np.isfinite(v):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return v

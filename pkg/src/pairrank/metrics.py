"""Agreement metrics between estimated and ground-truth scores.

Fitted BT scores live on a log-merit scale with an arbitrary origin, so the
RMSE against designed scores is computed after a least-squares affine
alignment of the estimates onto the ground truth. Kendall is the tie-
corrected tau-b. The rescaling helpers (arctanh for correlations, -1/y for
RMSE) are reporting transforms only; raw values are what the simulator
stores.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .errors import UndefinedCorrelationError

FISHER_CLAMP = 1.0 - 1e-12


def _check_pair_of_vectors(a, b) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(a, dtype=float).ravel()
    y = np.asarray(b, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 2:
        raise ValueError("need at least two values")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("inputs must be finite")
    return x, y


def kendall_tau(a, b) -> float:
    """Kendall rank correlation, tau-b (tie-corrected)."""
    x, y = _check_pair_of_vectors(a, b)
    return float(stats.kendalltau(x, y, variant="b").statistic)


def plcc(a, b) -> float:
    """Pearson linear correlation coefficient."""
    x, y = _check_pair_of_vectors(a, b)
    sx = x - x.mean()
    sy = y - y.mean()
    denom = np.sqrt((sx @ sx) * (sy @ sy))
    if denom == 0.0:
        raise UndefinedCorrelationError("correlation undefined for zero-variance input")
    return float(np.clip((sx @ sy) / denom, -1.0, 1.0))


def align_affine(estimates, targets) -> tuple[float, float]:
    """Least-squares (scale, offset) mapping estimates onto targets."""
    x, y = _check_pair_of_vectors(estimates, targets)
    design = np.column_stack([x, np.ones_like(x)])
    (scale, offset), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(scale), float(offset)


def rmse(estimates, targets, *, align: bool = True) -> float:
    """Root mean square error, by default after affine alignment."""
    x, y = _check_pair_of_vectors(estimates, targets)
    if align:
        scale, offset = align_affine(x, y)
        x = scale * x + offset
    return float(np.sqrt(np.mean((x - y) ** 2)))


def rescale_fisher(value: float) -> float:
    """Fisher transform arctanh(v), with |v| clamped just inside 1."""
    v = float(value)
    v = np.clip(v, -FISHER_CLAMP, FISHER_CLAMP)
    return float(np.arctanh(v))


def rescale_neg_inv(value: float) -> float:
    """Reporting transform -1/v for RMSE curves."""
    v = float(value)
    if v == 0.0:
        raise ValueError("rescale_neg_inv undefined at 0")
    return -1.0 / v


def saving_budget(comparisons: int, n: int) -> float:
    """Percentage of the 15-round full-pair-comparison budget avoided."""
    if comparisons < 0:
        raise ValueError("comparison count must be nonnegative")
    if n < 2:
        raise ValueError("need at least two items")
    full_budget = 15.0 * n * (n - 1) / 2.0
    return (1.0 - comparisons / full_budget) * 100.0

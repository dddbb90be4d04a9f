"""Expected information gain of candidate pairs under the fitted model.

Each pair's score difference carries a Gaussian prior derived from the
fitted covariance. The utility of asking an annotator about that pair is
the expected KL divergence between prior and posterior of the difference,
which reduces to four expectations of the outcome probabilities:

    U = E[p log p] + E[q log q] - E[p] log E[p] - E[q] log E[q]

with p = sigmoid(difference), q = 1 - p. After standardizing the Gaussian,
each expectation is a Gauss-Hermite integral against exp(-x^2), evaluated
with a fixed-order rule (default 30 nodes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, xlogy

from .bt import ScoreEstimate
from .validation import check_finite_scalar, check_pair

DEFAULT_QUADRATURE_ORDER = 30

# Utilities below this floor are treated as this floor when inverted into
# edge weights, so zero-information pairs stay usable without infinities.
UTILITY_FLOOR = 1e-12

MAX_QUADRATURE_ORDER = 100


@dataclass(frozen=True)
class PairGaussian:
    """Gaussian prior on one pair's score difference."""

    mean: float
    std: float

    def __post_init__(self):
        check_finite_scalar(self.mean, "mean")
        std = check_finite_scalar(self.std, "std")
        if std < 0:
            raise ValueError(f"std must be nonnegative, got {std}")


@dataclass(frozen=True)
class Quadrature:
    """Gauss-Hermite nodes and weights for the exp(-x^2) weight function."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != (self.order,) or weights.shape != (self.order,):
            raise ValueError("nodes/weights length must equal order")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)


def gh_nodes_weights(order: int = DEFAULT_QUADRATURE_ORDER) -> Quadrature:
    """Gauss-Hermite rule of the given order (physicists' convention).

    Nodes are the roots of the order-n Hermite polynomial, computed as
    eigenvalues of the symmetric Jacobi matrix of the recurrence
    (Golub-Welsch); weights come from the squared first eigenvector
    components scaled by the zeroth moment sqrt(pi). Exact for polynomials
    up to degree 2*order - 1 against exp(-x^2).
    """
    order = int(order)
    if not (1 <= order <= MAX_QUADRATURE_ORDER):
        raise ValueError(f"order must be in [1, {MAX_QUADRATURE_ORDER}], got {order}")
    if order == 1:
        return Quadrature(1, np.zeros(1), np.array([np.sqrt(np.pi)]))
    k = np.arange(1, order)
    jacobi = np.diag(np.sqrt(k / 2.0), 1)
    jacobi = jacobi + jacobi.T
    eigenvalues, eigenvectors = np.linalg.eigh(jacobi)
    nodes = eigenvalues
    weights = np.sqrt(np.pi) * eigenvectors[0, :] ** 2
    # eigh orders eigenvalues ascending; enforce exact antisymmetry of the
    # node set (the computed roots carry ~1e-16 asymmetry otherwise)
    half = order // 2
    nodes = (nodes - nodes[::-1]) / 2.0
    weights = (weights + weights[::-1]) / 2.0
    if order % 2 == 1:
        nodes[half] = 0.0
    return Quadrature(order, nodes, weights)


def pair_prior(estimate: ScoreEstimate, i: int, j: int) -> PairGaussian:
    """Prior on the score difference s_i - s_j implied by the fitted model.

    The variance is the quadratic form of the covariance along e_i - e_j,
    clamped at zero against covariance round-off.
    """
    i, j = check_pair(i, j, estimate.n)
    cov = estimate.covariance
    variance = cov[i, i] + cov[j, j] - 2.0 * cov[i, j]
    variance = max(variance, 0.0)
    return PairGaussian(
        mean=float(estimate.scores[i] - estimate.scores[j]),
        std=float(np.sqrt(variance)),
    )


def eig_pair(prior: PairGaussian, quad: Quadrature) -> float:
    """Expected information gain of observing one vote on the pair.

    A point-mass prior (std 0) carries no uncertainty about the outcome
    probability, so the gain is exactly zero.
    """
    if prior.std == 0.0:
        return 0.0
    value = _eig_from_moments(
        *_outcome_moments(np.array([prior.mean]), np.array([prior.std]), quad)
    )
    return float(max(value[0], 0.0))


def _outcome_moments(means, stds, quad: Quadrature):
    """Quadrature estimates of E[p], E[q], E[p log p], E[q log q] per pair."""
    x = np.sqrt(2.0) * stds[:, None] * quad.nodes[None, :] + means[:, None]
    p = expit(x)
    q = 1.0 - p
    w = quad.weights / np.sqrt(np.pi)
    return p @ w, q @ w, xlogy(p, p) @ w, xlogy(q, q) @ w


def _eig_from_moments(ep, eq, eplogp, eqlogq):
    return eplogp + eqlogq - xlogy(ep, ep) - xlogy(eq, eq)


@dataclass(frozen=True)
class UtilityGraph:
    """Symmetric matrix of pair utilities over all unordered pairs."""

    utilities: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.utilities, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError(f"utilities must be square, got shape {u.shape}")
        if not np.allclose(u, u.T, atol=1e-12, rtol=0.0):
            raise ValueError("utilities must be symmetric")
        if np.any(u[~np.eye(u.shape[0], dtype=bool)] < 0):
            raise ValueError("utilities must be nonnegative")
        u = (u + u.T) / 2.0
        u.flags.writeable = False
        object.__setattr__(self, "utilities", u)

    @property
    def n(self) -> int:
        return self.utilities.shape[0]

    def edge_weights(self, floor: float = UTILITY_FLOOR) -> np.ndarray:
        """Inverse utilities, floored so zero-information edges stay finite."""
        return 1.0 / np.maximum(self.utilities, floor)


def utility_graph(estimate: ScoreEstimate, quad: Quadrature | None = None) -> UtilityGraph:
    """Expected information gain for every unordered pair, vectorized."""
    quad = quad or gh_nodes_weights()
    n = estimate.n
    if n < 2:
        return UtilityGraph(np.zeros((n, n)))
    rows, cols = np.triu_indices(n, k=1)
    scores = estimate.scores
    cov = estimate.covariance
    diag = np.diag(cov)
    means = scores[rows] - scores[cols]
    variances = np.maximum(diag[rows] + diag[cols] - 2.0 * cov[rows, cols], 0.0)
    stds = np.sqrt(variances)

    values = np.zeros(len(rows))
    nonzero = stds > 0.0
    if np.any(nonzero):
        moments = _outcome_moments(means[nonzero], stds[nonzero], quad)
        values[nonzero] = np.maximum(_eig_from_moments(*moments), 0.0)

    utilities = np.zeros((n, n))
    utilities[rows, cols] = values
    utilities[cols, rows] = values
    return UtilityGraph(utilities)

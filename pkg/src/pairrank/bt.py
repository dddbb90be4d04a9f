"""Bradley-Terry model fitting from pairwise comparison counts.

The model places each item on a latent log-merit scale: item i beats item j
with probability sigmoid(s_i - s_j). Scores are identified only up to a
shared constant, so fitted scores are normalized to mean zero. The curvature
of the log-likelihood at the optimum gives a Gaussian approximation of the
score uncertainty; the covariance is obtained by inverting the negated
Hessian augmented with the mean-zero constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator

from .errors import ConvergenceError, SingularHessianError, UnidentifiableModelError
from .validation import check_counts_matrix, check_finite_scalar, check_scores

DEFAULT_PRIOR_COUNT = 1


@dataclass(frozen=True)
class ComparisonMatrix:
    """Square matrix of pairwise win counts.

    ``counts[i, j]`` is the number of trials in which item i beat item j,
    including ``prior_count`` virtual wins per ordered off-diagonal cell.
    The virtual counts keep the comparison graph connected (and the MLE
    finite) before real votes arrive; they are tracked separately so budget
    accounting can exclude them.
    """

    counts: np.ndarray
    prior_count: int = 0

    def __post_init__(self):
        counts = check_counts_matrix(self.counts)
        prior = int(self.prior_count)
        if prior < 0:
            raise ValueError("prior_count must be nonnegative")
        off_diag = ~np.eye(counts.shape[0], dtype=bool)
        if np.any(counts[off_diag] < prior):
            raise ValueError("counts may not be smaller than the virtual prior")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "prior_count", prior)

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @classmethod
    def empty(cls, n: int, prior_count: int = DEFAULT_PRIOR_COUNT) -> "ComparisonMatrix":
        """A matrix with no observed votes, seeded with the virtual prior."""
        if n < 1:
            raise ValueError("need at least one item")
        counts = np.full((n, n), int(prior_count), dtype=np.int64)
        np.fill_diagonal(counts, 0)
        return cls(counts, prior_count=int(prior_count))

    @classmethod
    def from_counts(cls, counts, prior_count: int = 0) -> "ComparisonMatrix":
        """Wrap an observed count matrix, optionally adding a virtual prior."""
        observed = check_counts_matrix(counts)
        prior = int(prior_count)
        total = observed.copy()
        if prior:
            off_diag = ~np.eye(total.shape[0], dtype=bool)
            total[off_diag] += prior
        return cls(total, prior_count=prior)

    def observed_counts(self) -> np.ndarray:
        """Counts with the virtual prior removed."""
        observed = self.counts.astype(np.int64).copy()
        if self.prior_count:
            off_diag = ~np.eye(self.n, dtype=bool)
            observed[off_diag] -= self.prior_count
        return observed

    def observed_total(self) -> int:
        return int(self.observed_counts().sum())

    def with_vote(self, i: int, j: int, outcome: int = 1) -> "ComparisonMatrix":
        """Return a new matrix with one vote recorded on pair (i, j).

        ``outcome`` 1 means i beat j, 0 means j beat i.
        """
        if outcome not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
        if i == j or not (0 <= i < self.n and 0 <= j < self.n):
            raise ValueError(f"invalid pair ({i}, {j}) for {self.n} items")
        counts = self.counts.copy()
        if outcome == 1:
            counts[i, j] += 1
        else:
            counts[j, i] += 1
        return ComparisonMatrix(counts, prior_count=self.prior_count)

    def is_connected(self) -> bool:
        """True when every pair of items is linked by observed or prior trials."""
        n = self.n
        if n <= 1:
            return True
        trials = self.counts + self.counts.T
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in np.nonzero(trials[u] > 0)[0]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(int(v))
        return bool(seen.all())


@dataclass(frozen=True)
class ScoreEstimate:
    """Fitted mean-zero scores with their Gaussian covariance."""

    scores: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        scores = check_scores(self.scores)
        cov = np.asarray(self.covariance, dtype=float)
        n = scores.shape[0]
        if cov.shape != (n, n):
            raise ValueError(f"covariance shape {cov.shape} does not match {n} scores")
        if not np.isfinite(cov).all():
            raise ValueError("covariance must be finite")
        if np.max(np.abs(cov - cov.T)) > 1e-9:
            raise ValueError("covariance must be symmetric")
        scores.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "covariance", cov)

    @property
    def n(self) -> int:
        return self.scores.shape[0]

    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))


@dataclass(frozen=True)
class FitOptions:
    grad_tol: float = 1e-9
    max_iter: int = 200
    ridge: float = 1e-8


def bt_probability(score_i: float, score_j: float) -> float:
    """Probability that the first item beats the second under the BT model."""
    a = check_finite_scalar(score_i, "score_i")
    b = check_finite_scalar(score_j, "score_j")
    return float(expit(a - b))


def log_likelihood(matrix: ComparisonMatrix, scores) -> float:
    """Log-likelihood of the count matrix under the given scores.

    Invariant under adding a constant to all scores.
    """
    s = check_scores(scores, matrix.n)
    diff = s[:, None] - s[None, :]
    # log sigmoid(d) = -log(1 + e^{-d}), stable for both signs of d
    log_p = -np.logaddexp(0.0, -diff)
    np.fill_diagonal(log_p, 0.0)
    return float(np.sum(matrix.counts * log_p))


def _gradient(counts: np.ndarray, trials: np.ndarray, scores: np.ndarray) -> np.ndarray:
    p = expit(scores[:, None] - scores[None, :])
    np.fill_diagonal(p, 0.0)
    return counts.sum(axis=1) - (trials * p).sum(axis=1)


def _hessian(trials: np.ndarray, scores: np.ndarray) -> np.ndarray:
    p = expit(scores[:, None] - scores[None, :])
    w = trials * p * (1.0 - p)
    np.fill_diagonal(w, 0.0)
    hess = w.copy()
    np.fill_diagonal(hess, -w.sum(axis=1))
    return hess


def covariance_from_hessian(hessian, ridge: float = 1e-8) -> np.ndarray:
    """Covariance of the score estimates from the log-likelihood Hessian.

    Inverts the negated Hessian bordered with a row/column of ones (the
    mean-zero constraint) and returns the top-left n-by-n block. A singular
    system is retried once with a small ridge on the negated Hessian.
    """
    hess = np.asarray(hessian, dtype=float)
    if hess.ndim != 2 or hess.shape[0] != hess.shape[1]:
        raise ValueError(f"hessian must be square, got shape {hess.shape}")
    n = hess.shape[0]

    def invert(neg_h: np.ndarray) -> np.ndarray:
        aug = np.zeros((n + 1, n + 1))
        aug[:n, :n] = neg_h
        aug[:n, n] = 1.0
        aug[n, :n] = 1.0
        return np.linalg.inv(aug)

    try:
        full = invert(-hess)
    except np.linalg.LinAlgError:
        try:
            full = invert(-hess + ridge * np.eye(n))
        except np.linalg.LinAlgError as exc:
            raise SingularHessianError(
                "augmented Hessian is singular even after ridge retry"
            ) from exc
    cov = full[:n, :n]
    return (cov + cov.T) / 2.0


def fit_bt(
    matrix: ComparisonMatrix,
    options: FitOptions | None = None,
    *,
    initial_scores=None,
) -> ScoreEstimate:
    """Maximum-likelihood BT scores with covariance, normalized to mean zero.

    Uses damped Newton steps constrained to the mean-zero subspace, with a
    gradient-ascent fallback when the Newton system cannot be solved. The
    log-likelihood is concave, so full Newton steps are accepted almost
    always; damping only guards degenerate fits.
    """
    opts = options or FitOptions()
    n = matrix.n
    counts = matrix.counts.astype(float)
    trials = counts + counts.T

    if n == 0:
        raise ValueError("cannot fit an empty comparison matrix")
    if n == 1:
        return ScoreEstimate(np.zeros(1), np.zeros((1, 1)))
    if not matrix.is_connected():
        raise UnidentifiableModelError(
            "comparison graph is disconnected; scores across components are "
            "not identified (enable a virtual prior or add comparisons)"
        )

    if initial_scores is not None:
        s = check_scores(initial_scores, n).copy()
        s -= s.mean()
    else:
        s = np.zeros(n)
    ll = log_likelihood(matrix, s)

    def finish(scores: np.ndarray) -> ScoreEstimate:
        hess = _hessian(trials, scores)
        cov = covariance_from_hessian(hess, ridge=opts.ridge)
        return ScoreEstimate(scores - scores.mean(), cov)

    stalled = 0
    for _ in range(opts.max_iter):
        grad = _gradient(counts, trials, s)
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm < opts.grad_tol:
            return finish(s)

        step = _newton_direction(trials, s, grad, opts.ridge)
        if step is None:
            step = grad - grad.mean()

        # Backtracking: halve until the log-likelihood stops decreasing.
        alpha = 1.0
        candidate = s
        ll_new = ll
        for _ in range(40):
            candidate = s + alpha * step
            candidate -= candidate.mean()
            ll_new = log_likelihood(matrix, candidate)
            if ll_new >= ll - 1e-12:
                break
            alpha *= 0.5

        # large count totals put the float64 gradient floor above an
        # absolute grad_tol; a motionless iterate is the numerical optimum
        if np.max(np.abs(candidate - s)) <= 1e-13 * max(1.0, float(np.max(np.abs(s)))):
            stalled += 1
            if stalled >= 2:
                return finish(candidate)
        else:
            stalled = 0
        s, ll = candidate, ll_new

    grad = _gradient(counts, trials, s)
    raise ConvergenceError(
        f"no convergence after {opts.max_iter} iterations "
        f"(max |gradient| = {np.max(np.abs(grad)):.3e})",
        last_scores=s - s.mean(),
        last_grad_norm=float(np.max(np.abs(grad))),
    )


def _newton_direction(trials, scores, grad, ridge) -> np.ndarray | None:
    """Solve the mean-zero-constrained Newton system; None if it fails."""
    n = scores.shape[0]
    hess = _hessian(trials, scores)
    rhs = np.concatenate([-grad, [0.0]])
    for regularized in (hess, hess - ridge * np.eye(n)):
        aug = np.zeros((n + 1, n + 1))
        aug[:n, :n] = regularized
        aug[:n, n] = 1.0
        aug[n, :n] = 1.0
        try:
            solution = np.linalg.solve(aug, rhs)
        except np.linalg.LinAlgError:
            continue
        if np.isfinite(solution).all():
            return solution[:n]
    return None


class BradleyTerry(BaseEstimator):
    """Scikit-learn style estimator for the BT model.

    Parameters
    ----------
    prior_count : int, default=0
        Virtual wins added to every ordered off-diagonal cell before
        fitting. Keeps the fit finite on sparse or one-sided data.
    grad_tol : float, default=1e-9
        Convergence threshold on the max absolute gradient component.
    max_iter : int, default=200
        Newton iteration budget.

    Attributes
    ----------
    scores_ : ndarray of shape (n_items,)
        Mean-zero log-merit scores.
    covariance_ : ndarray of shape (n_items, n_items)
        Gaussian covariance of the score estimates.
    n_items_ : int
    """

    def __init__(self, prior_count: int = 0, grad_tol: float = 1e-9, max_iter: int = 200):
        self.prior_count = prior_count
        self.grad_tol = grad_tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        """Fit from a square matrix of observed win counts."""
        matrix = X if isinstance(X, ComparisonMatrix) else ComparisonMatrix.from_counts(
            X, prior_count=self.prior_count
        )
        estimate = fit_bt(matrix, FitOptions(grad_tol=self.grad_tol, max_iter=self.max_iter))
        self.matrix_ = matrix
        self.estimate_ = estimate
        self.scores_ = estimate.scores
        self.covariance_ = estimate.covariance
        self.n_items_ = matrix.n
        return self

    def predict_proba(self, pairs) -> np.ndarray:
        """Win probability of the first index over the second, per pair."""
        self._check_fitted()
        pairs = np.atleast_2d(np.asarray(pairs, dtype=int))
        return expit(self.scores_[pairs[:, 0]] - self.scores_[pairs[:, 1]])

    def score(self, X, y=None) -> float:
        """Log-likelihood of a count matrix under the fitted scores."""
        self._check_fitted()
        matrix = X if isinstance(X, ComparisonMatrix) else ComparisonMatrix.from_counts(X)
        return log_likelihood(matrix, self.scores_)

    def _check_fitted(self):
        if not hasattr(self, "scores_"):
            raise AttributeError("estimator is not fitted; call fit(X) first")

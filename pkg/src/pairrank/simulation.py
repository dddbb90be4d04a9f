"""Monte Carlo simulation of active pairwise-comparison experiments.

Synthetic ground truth assigns each item a score in [1, 5] and a per-item
observation noise in [0, 0.7]. A simulated annotator compares two items by
sampling noisy observations and voting for the larger, then inverts the
vote with a fixed error probability. Budgets are expressed in standard
trial numbers: one standard trial is n(n-1)/2 comparisons, a full round of
all pairs by one annotator.

All randomness flows through :class:`RngStream` (PCG64), so a seed fully
determines every trajectory. Repetition r of a run uses seed ``base + r``,
which makes parallel and serial schedules produce identical results, and
gives every strategy within a repetition the same ground truth and the
same vote-noise stream (paired comparisons, common random numbers).
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bt import ComparisonMatrix, FitOptions, fit_bt
from .information import DEFAULT_QUADRATURE_ORDER, gh_nodes_weights, utility_graph
from .metrics import kendall_tau, plcc, rmse
from .sampling import SamplerState, next_batch, select_gm, select_mst
from .validation import check_pair

STRATEGIES = ("hybrid-mst", "gm-only", "mst-only", "random", "fpc")

DEFAULT_EVAL_POINTS = (0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 15.0)


class RngStream:
    """Seeded random stream; same seed gives the same draws everywhere.

    Backed by numpy's PCG64 generator. Vote simulation draws, in order: one
    normal per item with positive noise, a tie-break uniform only on an
    exact tie, and one inversion uniform per vote regardless of error rate.
    """

    algorithm = "pcg64"

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def random(self) -> float:
        return float(self._gen.random())

    def integers(self, low: int, high: int | None = None) -> int:
        return int(self._gen.integers(low, high))

    def shuffle(self, values: list) -> None:
        self._gen.shuffle(values)


@dataclass(frozen=True)
class GroundTruth:
    """Designed item scores with per-item observation noise."""

    scores: np.ndarray
    sigmas: np.ndarray
    error_rate: float = 0.0

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        sigmas = np.asarray(self.sigmas, dtype=float)
        if scores.ndim != 1 or scores.shape != sigmas.shape:
            raise ValueError("scores and sigmas must be 1-D vectors of equal length")
        if np.any(sigmas < 0):
            raise ValueError("sigmas must be nonnegative")
        if not (0.0 <= self.error_rate < 1.0):
            raise ValueError("error_rate must be in [0, 1)")
        scores.flags.writeable = False
        sigmas.flags.writeable = False
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "sigmas", sigmas)

    @property
    def n(self) -> int:
        return self.scores.shape[0]


def gen_ground_truth(n: int, rng: RngStream, error_rate: float = 0.0) -> GroundTruth:
    """Draw scores from U[1, 5] and noise levels from U[0, 0.7]."""
    if n < 2:
        raise ValueError("need at least two items")
    scores = rng.uniform(1.0, 5.0, n)
    sigmas = rng.uniform(0.0, 0.7, n)
    return GroundTruth(scores, sigmas, error_rate)


def simulate_vote(gt: GroundTruth, i: int, j: int, rng: RngStream) -> int:
    """One annotator vote on pair (i, j): 1 when i is preferred.

    Observations are scores plus Gaussian noise; an exact tie is settled by
    a fair coin; the result is inverted with probability ``error_rate``.
    """
    i, j = check_pair(i, j, gt.n)
    r_i = gt.scores[i] + (rng.normal(0.0, gt.sigmas[i]) if gt.sigmas[i] > 0 else 0.0)
    r_j = gt.scores[j] + (rng.normal(0.0, gt.sigmas[j]) if gt.sigmas[j] > 0 else 0.0)
    if r_i > r_j:
        y = 1
    elif r_i < r_j:
        y = 0
    else:
        y = 1 if rng.random() < 0.5 else 0
    if rng.random() < gt.error_rate:
        y = 1 - y
    return y


@dataclass(frozen=True)
class MetricTrajectory:
    """Metric values along the vote budget for one simulated run."""

    strategy: str
    budget_axis: tuple[float, ...]
    votes: tuple[int, ...]
    kendall: tuple[float, ...]
    plcc: tuple[float, ...]
    rmse: tuple[float, ...]
    repetitions: int = 1


def run_experiment(
    gt: GroundTruth,
    strategy: str,
    budget: float,
    eval_points=None,
    rng: RngStream | None = None,
    *,
    quad_order: int = DEFAULT_QUADRATURE_ORDER,
    prior_count: int = 1,
    fit_options: FitOptions | None = None,
) -> MetricTrajectory:
    """Run one budgeted sampling loop and record metrics at eval points.

    ``budget`` and ``eval_points`` are in standard trial numbers. The
    adaptive strategies refit after every selection (a single vote in GM
    mode, a full tree batch in MST mode); the non-adaptive comparators
    (random, fpc) fit only when metrics are recorded.

    Metrics are computed from fits of the observed votes alone: the
    virtual prior is a sampling device that keeps the active fit
    resolvable, not annotator evidence, and leaving it in biases the
    recovered ratings of sparsely compared pairs. While the observed
    comparison graph is still disconnected (possible at very small
    budgets), the evaluation falls back to the prior-inclusive fit.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if budget <= 0:
        raise ValueError("budget must be positive")
    if rng is None:
        rng = RngStream(0)
    n = gt.n
    spn = n * (n - 1) // 2
    budget_votes = int(round(budget * spn))
    points = sorted(set(eval_points if eval_points is not None else DEFAULT_EVAL_POINTS))
    eval_votes = sorted({v for v in (max(1, int(round(p * spn))) for p in points) if v <= budget_votes})
    eval_set = set(eval_votes)

    opts = fit_options or FitOptions()
    quad = gh_nodes_weights(quad_order)
    adaptive = strategy in ("hybrid-mst", "gm-only", "mst-only")
    matrix = ComparisonMatrix.empty(n, prior_count=prior_count)
    observed = 0
    warm = None
    current_fit = None
    fitted_at = -1
    all_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    fpc_queue: list[tuple[int, int]] = []
    recorded: dict[int, tuple[float, float, float]] = {}

    def ensure_fit():
        nonlocal warm, current_fit, fitted_at
        if fitted_at != observed:
            current_fit = fit_bt(matrix, opts, initial_scores=warm)
            warm = current_fit.scores
            fitted_at = observed
        return current_fit

    def metric_fit():
        observed_only = ComparisonMatrix.from_counts(matrix.observed_counts(), prior_count=0)
        if observed_only.is_connected():
            return fit_bt(observed_only, opts, initial_scores=warm)
        return ensure_fit()

    while observed < budget_votes:
        if adaptive:
            graph = utility_graph(ensure_fit(), quad)
            if strategy == "hybrid-mst":
                batch = list(next_batch(graph, SamplerState(n, observed)))
            elif strategy == "gm-only":
                batch = [select_gm(graph)]
            else:
                batch = list(select_mst(graph))
        elif strategy == "random":
            batch = [all_pairs[rng.integers(len(all_pairs))]]
        else:  # fpc: rounds of every pair, shuffled
            if not fpc_queue:
                fpc_queue = list(all_pairs)
                rng.shuffle(fpc_queue)
            batch = [fpc_queue.pop()]

        for i, j in batch:
            if observed >= budget_votes:
                break
            y = simulate_vote(gt, i, j, rng)
            matrix = matrix.with_vote(i, j, y)
            observed += 1
            if observed in eval_set:
                est = metric_fit()
                recorded[observed] = (
                    kendall_tau(est.scores, gt.scores),
                    plcc(est.scores, gt.scores),
                    rmse(est.scores, gt.scores),
                )

    votes = [v for v in eval_votes if v in recorded]
    return MetricTrajectory(
        strategy=strategy,
        budget_axis=tuple(v / spn for v in votes),
        votes=tuple(votes),
        kendall=tuple(recorded[v][0] for v in votes),
        plcc=tuple(recorded[v][1] for v in votes),
        rmse=tuple(recorded[v][2] for v in votes),
    )


@dataclass(frozen=True)
class SimulationConfig:
    """Reproducible description of a replicated simulation run."""

    n: int = 20
    error_rate: float = 0.1
    budget: float = 15.0
    strategies: tuple[str, ...] = ("hybrid-mst", "random", "fpc")
    reps: int = 100
    seed: int = 0
    eval_points: tuple[float, ...] = DEFAULT_EVAL_POINTS
    quad_order: int = DEFAULT_QUADRATURE_ORDER
    prior_count: int = 1
    jobs: int = 1

    def __post_init__(self):
        unknown = [s for s in self.strategies if s not in STRATEGIES]
        if unknown:
            raise ValueError(f"unknown strategies {unknown}; expected subset of {STRATEGIES}")

    @classmethod
    def from_json(cls, path) -> "SimulationConfig":
        data = json.loads(Path(path).read_text())
        if "quadrature_order" in data:
            data["quad_order"] = data.pop("quadrature_order")
        for key in ("strategies", "eval_points"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "error_rate": self.error_rate,
            "budget": self.budget,
            "strategies": list(self.strategies),
            "reps": self.reps,
            "seed": self.seed,
            "eval_points": list(self.eval_points),
            "quadrature_order": self.quad_order,
            "prior_count": self.prior_count,
        }

    def to_kwargs(self) -> dict:
        """Constructor keyword arguments, for override merging."""
        return {
            "n": self.n,
            "error_rate": self.error_rate,
            "budget": self.budget,
            "strategies": self.strategies,
            "reps": self.reps,
            "seed": self.seed,
            "eval_points": self.eval_points,
            "quad_order": self.quad_order,
            "prior_count": self.prior_count,
            "jobs": self.jobs,
        }


def _run_one_rep(config: SimulationConfig, rep: int) -> dict[str, MetricTrajectory]:
    out = {}
    for strategy in config.strategies:
        rng = RngStream(config.seed + rep)
        gt = gen_ground_truth(config.n, rng, error_rate=config.error_rate)
        out[strategy] = run_experiment(
            gt,
            strategy,
            config.budget,
            config.eval_points,
            rng,
            quad_order=config.quad_order,
            prior_count=config.prior_count,
        )
    return out


def run_replications(config: SimulationConfig) -> dict[str, list[MetricTrajectory]]:
    """Run ``config.reps`` independent repetitions of every strategy.

    Ground truth is redrawn per repetition; within a repetition all
    strategies see the same ground truth and start from the same stream
    state, so cross-strategy comparisons are paired.
    """
    by_strategy: dict[str, list[MetricTrajectory]] = {s: [] for s in config.strategies}
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            rep_results = list(pool.map(_run_one_rep, [config] * config.reps, range(config.reps)))
    else:
        rep_results = [_run_one_rep(config, rep) for rep in range(config.reps)]
    for rep_out in rep_results:
        for strategy, trajectory in rep_out.items():
            by_strategy[strategy].append(trajectory)
    return by_strategy


def metric_matrix(trajectories: list[MetricTrajectory], metric: str) -> np.ndarray:
    """Stack one metric across repetitions: shape (reps, eval points)."""
    return np.array([getattr(t, metric) for t in trajectories], dtype=float)


def summarize(by_strategy: dict[str, list[MetricTrajectory]]) -> dict:
    """Means and 95% confidence intervals per strategy and eval point."""
    summary = {}
    for strategy, trajectories in by_strategy.items():
        reps = len(trajectories)
        entry = {
            "repetitions": reps,
            "budget_axis": list(trajectories[0].budget_axis),
            "votes": list(trajectories[0].votes),
        }
        for metric in ("kendall", "plcc", "rmse"):
            values = metric_matrix(trajectories, metric)
            mean = values.mean(axis=0)
            half_width = 1.96 * values.std(axis=0, ddof=1) / np.sqrt(reps) if reps > 1 else np.zeros_like(mean)
            entry[metric] = {
                "mean": mean.tolist(),
                "ci95_low": (mean - half_width).tolist(),
                "ci95_high": (mean + half_width).tolist(),
            }
        summary[strategy] = entry
    return summary


def budget_to_reach(votes, means, target: float, *, higher_is_better: bool = True) -> int | None:
    """Smallest vote count at which the mean metric reaches the target."""
    for v, m in zip(votes, means):
        if (m >= target) if higher_is_better else (m <= target):
            return int(v)
    return None


def write_trajectories_csv(path, by_strategy: dict[str, list[MetricTrajectory]]) -> None:
    """CSV dump, one row per (strategy, repetition, eval point)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["strategy", "rep", "budget", "kendall", "plcc", "rmse"])
        for strategy, trajectories in by_strategy.items():
            for rep, traj in enumerate(trajectories):
                for k in range(len(traj.votes)):
                    writer.writerow([
                        strategy,
                        rep,
                        f"{traj.budget_axis[k]:.10g}",
                        f"{traj.kendall[k]:.10g}",
                        f"{traj.plcc[k]:.10g}",
                        f"{traj.rmse[k]:.10g}",
                    ])

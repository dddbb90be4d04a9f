"""Active pairwise preference aggregation.

Recovers latent item ratings from sparse, noisy pairwise comparisons by
fitting a Bradley-Terry model, and decides which pairs to ask about next by
maximizing expected information gain, either one pair at a time or as
spanning-tree batches that annotators can vote in parallel.
"""

from .bt import (
    BradleyTerry,
    ComparisonMatrix,
    FitOptions,
    ScoreEstimate,
    bt_probability,
    covariance_from_hessian,
    fit_bt,
    log_likelihood,
)
from .errors import (
    ConvergenceError,
    DatasetFormatError,
    PairrankError,
    SingularHessianError,
    UndefinedCorrelationError,
    UnidentifiableModelError,
)
from .information import (
    DEFAULT_QUADRATURE_ORDER,
    PairGaussian,
    Quadrature,
    UtilityGraph,
    eig_pair,
    gh_nodes_weights,
    pair_prior,
    utility_graph,
)
from .metrics import (
    align_affine,
    kendall_tau,
    plcc,
    rescale_fisher,
    rescale_neg_inv,
    rmse,
    saving_budget,
)
from .sampling import PairBatch, SamplerState, next_batch, select_gm, select_mst
from .simulation import (
    DEFAULT_EVAL_POINTS,
    STRATEGIES,
    GroundTruth,
    MetricTrajectory,
    RngStream,
    SimulationConfig,
    gen_ground_truth,
    run_experiment,
    run_replications,
    simulate_vote,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "BradleyTerry",
    "ComparisonMatrix",
    "ConvergenceError",
    "DEFAULT_EVAL_POINTS",
    "DEFAULT_QUADRATURE_ORDER",
    "DatasetFormatError",
    "FitOptions",
    "GroundTruth",
    "MetricTrajectory",
    "PairBatch",
    "PairGaussian",
    "PairrankError",
    "Quadrature",
    "RngStream",
    "SamplerState",
    "ScoreEstimate",
    "SimulationConfig",
    "SingularHessianError",
    "STRATEGIES",
    "UndefinedCorrelationError",
    "UnidentifiableModelError",
    "UtilityGraph",
    "align_affine",
    "bt_probability",
    "covariance_from_hessian",
    "eig_pair",
    "fit_bt",
    "gen_ground_truth",
    "gh_nodes_weights",
    "kendall_tau",
    "log_likelihood",
    "next_batch",
    "pair_prior",
    "plcc",
    "rescale_fisher",
    "rescale_neg_inv",
    "rmse",
    "run_experiment",
    "run_replications",
    "saving_budget",
    "select_gm",
    "select_mst",
    "simulate_vote",
    "summarize",
    "utility_graph",
]

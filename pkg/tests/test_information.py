import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairrank import (
    ComparisonMatrix,
    PairGaussian,
    Quadrature,
    ScoreEstimate,
    UtilityGraph,
    eig_pair,
    fit_bt,
    gh_nodes_weights,
    pair_prior,
    utility_graph,
)
from pairrank.information import _eig_from_moments, _outcome_moments

from .conftest import random_matrix
from .oracles import eig_trapezoid

GRID_MEANS = (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 5.0, -5.0)
GRID_STDS = (0.1, 0.5, 1.0, 2.0)


class TestQuadrature:
    def test_order_one(self):
        q = gh_nodes_weights(1)
        assert q.nodes.tolist() == [0.0]
        assert q.weights[0] == pytest.approx(np.sqrt(np.pi), abs=1e-15)

    def test_order_two_closed_form(self):
        # roots of 4x^2 - 2 and equal weights sqrt(pi)/2; checked against
        # exact integration of x^2 e^{-x^2}
        q = gh_nodes_weights(2)
        assert q.nodes == pytest.approx([-1 / np.sqrt(2), 1 / np.sqrt(2)], abs=1e-14)
        assert q.weights == pytest.approx([np.sqrt(np.pi) / 2] * 2, abs=1e-14)
        assert (q.weights * q.nodes**2).sum() == pytest.approx(np.sqrt(np.pi) / 2, abs=1e-14)

    def test_weights_sum_to_sqrt_pi(self, quad30):
        assert quad30.weights.sum() == pytest.approx(np.sqrt(np.pi), abs=1e-10)

    def test_second_moment_identity(self, quad30):
        assert (quad30.weights * quad30.nodes**2).sum() == pytest.approx(
            np.sqrt(np.pi) / 2, abs=1e-12
        )

    def test_nodes_antisymmetric_weights_symmetric(self, quad30):
        assert np.array_equal(quad30.nodes, -quad30.nodes[::-1])
        assert np.array_equal(quad30.weights, quad30.weights[::-1])

    @pytest.mark.parametrize("order", [3, 7, 10, 30, 64])
    def test_matches_numpy_hermgauss(self, order):
        ours = gh_nodes_weights(order)
        nodes, weights = np.polynomial.hermite.hermgauss(order)
        assert np.allclose(ours.nodes, nodes, atol=1e-12)
        assert np.allclose(ours.weights, weights, atol=1e-12)

    @pytest.mark.parametrize("order", [2, 5, 12, 30])
    def test_weight_formula(self, order):
        # w_i = 2^{n-1} n! sqrt(pi) / (n^2 H_{n-1}(x_i)^2)
        from math import factorial

        q = gh_nodes_weights(order)
        coeffs = np.zeros(order)
        coeffs[order - 1] = 1.0
        h_prev = np.polynomial.hermite.hermval(q.nodes, coeffs)
        expected = (
            2 ** (order - 1) * factorial(order) * np.sqrt(np.pi) / (order**2 * h_prev**2)
        )
        assert np.allclose(q.weights, expected, rtol=1e-12)

    @pytest.mark.parametrize("degree", [0, 1, 5, 11])
    def test_exact_for_polynomials(self, degree):
        # rule of order m integrates x^degree exactly for degree <= 2m-1;
        # odd moments vanish, even moment 2k is Gamma(k + 1/2)
        order = 6
        q = gh_nodes_weights(order)
        estimate = (q.weights * q.nodes**degree).sum()
        if degree % 2 == 1:
            exact = 0.0
        else:
            from math import gamma

            exact = gamma((degree + 1) / 2)
        assert estimate == pytest.approx(exact, abs=1e-12)

    @pytest.mark.parametrize("order", [0, -3, 101])
    def test_order_out_of_range(self, order):
        with pytest.raises(ValueError):
            gh_nodes_weights(order)

    def test_quadrature_type_validates(self):
        with pytest.raises(ValueError):
            Quadrature(order=2, nodes=np.zeros(3), weights=np.ones(2))
        with pytest.raises(ValueError):
            Quadrature(order=2, nodes=np.zeros(2), weights=np.array([1.0, -1.0]))


class TestPairPrior:
    def test_identity_covariance(self):
        est = ScoreEstimate(np.array([1.0, 0.0, -1.0]), np.eye(3))
        prior = pair_prior(est, 0, 1)
        assert prior.mean == 1.0
        assert prior.std == pytest.approx(np.sqrt(2.0), abs=1e-15)

    def test_antisymmetry(self, fitted_estimate):
        forward = pair_prior(fitted_estimate, 0, 2)
        backward = pair_prior(fitted_estimate, 2, 0)
        assert forward.mean == pytest.approx(-backward.mean, abs=1e-15)
        assert forward.std == backward.std

    def test_matches_quadratic_form(self, fitted_estimate):
        cov = fitted_estimate.covariance
        for i in range(4):
            for j in range(4):
                if i == j:
                    continue
                basis = np.zeros(4)
                basis[i], basis[j] = 1.0, -1.0
                expected = float(basis @ cov @ basis)
                prior = pair_prior(fitted_estimate, i, j)
                assert prior.std**2 == pytest.approx(expected, abs=1e-12)

    def test_same_index_rejected(self, fitted_estimate):
        with pytest.raises(ValueError):
            pair_prior(fitted_estimate, 1, 1)

    def test_negative_variance_clamped(self):
        # covariance implying negative pair variance (round-off scenario)
        cov = np.array([[1.0, 1.0 + 1e-12], [1.0 + 1e-12, 1.0]])
        est = ScoreEstimate(np.zeros(2), (cov + cov.T) / 2)
        assert pair_prior(est, 0, 1).std == 0.0


class TestEigPair:
    def test_zero_std_is_exactly_zero(self, quad30):
        assert eig_pair(PairGaussian(0.7, 0.0), quad30) == 0.0
        assert eig_pair(PairGaussian(-3.0, 0.0), quad30) == 0.0

    def test_against_trapezoid_oracle_at_origin(self, quad30):
        oracle = eig_trapezoid(0.0, 1.0)
        assert eig_pair(PairGaussian(0.0, 1.0), quad30) == pytest.approx(oracle, abs=1e-6)

    @given(st.floats(-8, 8), st.floats(0, 3))
    @settings(max_examples=40, deadline=None)
    def test_sign_symmetry(self, quad30, mean, std):
        assert eig_pair(PairGaussian(mean, std), quad30) == pytest.approx(
            eig_pair(PairGaussian(-mean, std), quad30), abs=1e-12
        )

    @pytest.mark.parametrize("mean", GRID_MEANS)
    @pytest.mark.parametrize("std", GRID_STDS)
    def test_nonnegative_before_clamp(self, mean, std, quad30):
        raw = _eig_from_moments(*_outcome_moments(np.array([mean]), np.array([std]), quad30))
        assert raw[0] >= -1e-9

    @pytest.mark.parametrize("mean", GRID_MEANS)
    @pytest.mark.parametrize("std", GRID_STDS)
    def test_quadrature_convergence_order_30_vs_60(self, mean, std, quad30):
        # order-30 truncation error reaches ~7e-7 at std=2, so the 30-vs-60
        # gap is bounded by the same 1e-6 the brute-force oracle check uses
        quad60 = gh_nodes_weights(60)
        prior = PairGaussian(mean, std)
        assert eig_pair(prior, quad30) == pytest.approx(eig_pair(prior, quad60), abs=1e-6)

    @pytest.mark.parametrize("mean", (0.0, 1.0, -2.0, 5.0))
    @pytest.mark.parametrize("std", (0.1, 0.5, 1.0))
    def test_quadrature_convergence_tight_for_moderate_spread(self, mean, std, quad30):
        quad60 = gh_nodes_weights(60)
        prior = PairGaussian(mean, std)
        assert eig_pair(prior, quad30) == pytest.approx(eig_pair(prior, quad60), abs=1e-8)

    def test_rejects_negative_std(self):
        with pytest.raises(ValueError):
            PairGaussian(0.0, -0.1)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            PairGaussian(float("nan"), 1.0)


class TestUtilityGraph:
    def test_two_items(self, quad30):
        est = fit_bt(random_matrix(2, seed=1))
        graph = utility_graph(est, quad30)
        assert graph.n == 2
        assert graph.utilities[0, 1] == graph.utilities[1, 0] > 0

    def test_exchangeable_items_have_equal_utilities(self, quad30):
        counts = np.full((4, 4), 3)
        np.fill_diagonal(counts, 0)
        est = fit_bt(ComparisonMatrix(counts))
        graph = utility_graph(est, quad30)
        off = graph.utilities[~np.eye(4, dtype=bool)]
        assert np.ptp(off) < 1e-12

    def test_cells_match_independent_eig_calls(self, quad30):
        est = fit_bt(random_matrix(5, seed=31))
        graph = utility_graph(est, quad30)
        for i in range(5):
            for j in range(i + 1, 5):
                expected = eig_pair(pair_prior(est, i, j), quad30)
                assert graph.utilities[i, j] == pytest.approx(expected, abs=1e-13)
                assert graph.utilities[j, i] == graph.utilities[i, j]

    def test_shape_on_grid(self, quad30):
        # more similar scores -> more information; more uncertainty -> more
        # information (checked on the grid, not claimed globally)
        stds_axis = sorted(GRID_STDS)
        abs_means = (0.0, 0.5, 1.0, 2.0, 5.0)
        for std in stds_axis:
            values = [eig_pair(PairGaussian(m, std), quad30) for m in abs_means]
            assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))
        for mean in abs_means:
            values = [eig_pair(PairGaussian(mean, s), quad30) for s in stds_axis]
            assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))

    def test_edge_weights_floor(self):
        graph = UtilityGraph(np.zeros((3, 3)))
        weights = graph.edge_weights()
        off = weights[~np.eye(3, dtype=bool)]
        assert np.all(off == 1e12)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            UtilityGraph(np.array([[0.0, 1.0], [2.0, 0.0]]))

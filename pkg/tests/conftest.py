import numpy as np
import pytest

from pairrank import ComparisonMatrix, RngStream, fit_bt, gh_nodes_weights


@pytest.fixture(scope="session")
def quad30():
    return gh_nodes_weights(30)


@pytest.fixture
def rng():
    return RngStream(20240601)


def random_matrix(n: int, seed: int, max_count: int = 10, prior_count: int = 1) -> ComparisonMatrix:
    """Random comparison matrix with a virtual prior (always connected)."""
    gen = np.random.Generator(np.random.PCG64(seed))
    counts = gen.integers(0, max_count + 1, size=(n, n))
    np.fill_diagonal(counts, 0)
    return ComparisonMatrix.from_counts(counts, prior_count=prior_count)


@pytest.fixture
def fitted_estimate():
    return fit_bt(random_matrix(4, seed=7))

import numpy as np
import pytest

from pairrank import PairBatch, SamplerState, UtilityGraph, next_batch, select_gm, select_mst

from .oracles import min_spanning_tree_weight, tree_weight


def graph_from(utilities) -> UtilityGraph:
    u = np.asarray(utilities, dtype=float)
    return UtilityGraph(u)


def random_utilities(n: int, seed: int) -> UtilityGraph:
    gen = np.random.Generator(np.random.PCG64(seed))
    u = gen.uniform(0.01, 5.0, size=(n, n))
    u = (u + u.T) / 2
    np.fill_diagonal(u, 0.0)
    return UtilityGraph(u)


class TestSelectGm:
    def test_two_items(self):
        assert select_gm(graph_from([[0.0, 0.4], [0.4, 0.0]])) == (0, 1)

    def test_direct_max(self):
        u = [[0.0, 3.0, 1.0], [3.0, 0.0, 2.0], [1.0, 2.0, 0.0]]
        assert select_gm(graph_from(u)) == (0, 1)

    def test_all_equal_breaks_to_smallest_pair(self):
        u = np.ones((4, 4)) - np.eye(4)
        assert select_gm(graph_from(u)) == (0, 1)

    def test_tie_between_two_pairs(self):
        u = np.zeros((4, 4))
        u[0, 3] = u[3, 0] = 2.0
        u[1, 2] = u[2, 1] = 2.0
        assert select_gm(graph_from(u)) == (0, 3)

    def test_monotone_transform_invariance(self):
        graph = random_utilities(6, seed=4)
        transformed = UtilityGraph(np.where(np.eye(6, dtype=bool), 0.0, np.exp(graph.utilities)))
        assert select_gm(graph) == select_gm(transformed)

    def test_single_item_rejected(self):
        with pytest.raises(ValueError):
            select_gm(graph_from([[0.0]]))


class TestSelectMst:
    def test_two_items(self):
        batch = select_mst(graph_from([[0.0, 0.4], [0.4, 0.0]]))
        assert batch.pairs == ((0, 1),)

    def test_three_item_derived_case(self):
        # weights 1/10, 1/1, 1/5: tree {(0,1),(1,2)} with 0.1 + 0.2 beats
        # {(0,1),(0,2)} = 1.1 and {(0,2),(1,2)} = 1.2
        u = [[0.0, 10.0, 1.0], [10.0, 0.0, 5.0], [1.0, 5.0, 0.0]]
        batch = select_mst(graph_from(u))
        assert set(batch.pairs) == {(0, 1), (1, 2)}

    def test_edge_count_and_spanning(self):
        for seed in range(10):
            n = 3 + seed % 4
            batch = select_mst(random_utilities(n, seed=seed))
            assert len(batch) == n - 1
            touched = {v for pair in batch for v in pair}
            assert touched == set(range(n))

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_matches_exhaustive_enumeration(self, n):
        # exact equality: both sides sum the edge weights in ascending order
        for seed in range(8):
            graph = random_utilities(n, seed=100 * n + seed)
            weights = graph.edge_weights()
            batch = select_mst(graph)
            assert tree_weight(weights, batch.pairs) == min_spanning_tree_weight(weights)

    def test_scaling_utilities_preserves_edge_set(self):
        graph = random_utilities(6, seed=77)
        scaled = UtilityGraph(graph.utilities * 37.5)
        assert set(select_mst(graph).pairs) == set(select_mst(scaled).pairs)

    def test_zero_utilities_still_span(self):
        batch = select_mst(graph_from(np.zeros((4, 4))))
        assert len(batch) == 3
        assert {v for pair in batch for v in pair} == {0, 1, 2, 3}

    def test_deterministic_under_ties(self):
        u = np.ones((5, 5)) - np.eye(5)
        first = select_mst(graph_from(u)).pairs
        second = select_mst(graph_from(u)).pairs
        assert first == second
        # all-equal weights: lexicographic growth gives the star at 0
        assert set(first) == {(0, 1), (0, 2), (0, 3), (0, 4)}


class TestNextBatch:
    def make_state(self, n, observed):
        return SamplerState(n=n, observed_votes=observed)

    def test_zero_votes_is_gm(self):
        graph = random_utilities(4, seed=1)
        batch = next_batch(graph, self.make_state(4, 0))
        assert len(batch) == 1

    def test_boundary_stays_gm(self):
        # threshold n(n-1)/2 = 6 kept inclusive
        graph = random_utilities(4, seed=2)
        batch = next_batch(graph, self.make_state(4, 6))
        assert len(batch) == 1

    def test_past_boundary_is_mst(self):
        graph = random_utilities(4, seed=3)
        batch = next_batch(graph, self.make_state(4, 7))
        assert len(batch) == 3

    def test_pure_function(self):
        graph = random_utilities(5, seed=9)
        state = self.make_state(5, 30)
        assert next_batch(graph, state).pairs == next_batch(graph, state).pairs

    def test_item_count_mismatch(self):
        graph = random_utilities(4, seed=1)
        with pytest.raises(ValueError):
            next_batch(graph, self.make_state(5, 0))


class TestPairBatch:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            PairBatch(((0, 1), (0, 1)))

    def test_rejects_unordered_pairs(self):
        with pytest.raises(ValueError):
            PairBatch(((1, 0),))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            PairBatch(())


class TestSamplerState:
    def test_standard_trial_votes(self):
        assert SamplerState(4, 0).standard_trial_votes == 6
        assert SamplerState(20, 0).standard_trial_votes == 190

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            SamplerState(1, 0)
        with pytest.raises(ValueError):
            SamplerState(4, -1)

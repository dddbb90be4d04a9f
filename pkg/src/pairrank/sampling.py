"""Pair selection: single best pair, spanning-tree batches, and the
budget-gated hybrid of the two.

Early in an experiment the single most informative pair is worth the
sequential round-trip; once every item has had a fair number of looks
(one standard trial, n(n-1)/2 observed votes), batches are better. The
batch is the minimum spanning tree of the complete graph under inverse-
utility weights: n-1 edges that keep the comparison graph connected while
maximizing collected information, and that annotators can vote in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .information import UTILITY_FLOOR, UtilityGraph


@dataclass(frozen=True)
class PairBatch:
    """An ordered, duplicate-free list of canonical (i, j) pairs, i < j."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(i), int(j)) for i, j in self.pairs)
        if not pairs:
            raise ValueError("batch must be nonempty")
        for i, j in pairs:
            if i >= j or i < 0:
                raise ValueError(f"pairs must satisfy 0 <= i < j, got ({i}, {j})")
        if len(set(pairs)) != len(pairs):
            raise ValueError("batch contains duplicate pairs")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


@dataclass(frozen=True)
class SamplerState:
    """Vote budget spent so far, excluding virtual prior counts."""

    n: int
    observed_votes: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two items")
        if self.observed_votes < 0:
            raise ValueError("observed_votes must be nonnegative")

    @property
    def standard_trial_votes(self) -> int:
        """Votes in one full round of all pairs: n(n-1)/2."""
        return self.n * (self.n - 1) // 2


def select_gm(graph: UtilityGraph) -> tuple[int, int]:
    """The unordered pair with the highest utility.

    Ties break to the lexicographically smallest (i, j).
    """
    n = graph.n
    if n < 2:
        raise ValueError("need at least two items to select a pair")
    rows, cols = np.triu_indices(n, k=1)
    values = graph.utilities[rows, cols]
    best = values.max()
    at_best = np.nonzero(values == best)[0]
    k = at_best[0]  # triu_indices enumerates in lexicographic (i, j) order
    return int(rows[k]), int(cols[k])


def select_mst(graph: UtilityGraph) -> PairBatch:
    """Minimum spanning tree of the complete graph under 1/utility weights.

    Prim's algorithm on the dense adjacency, O(n^2) per step; each step
    picks the lightest crossing edge, ties broken by the lexicographically
    smallest canonical pair. Edges are returned in the order the tree grew.
    """
    n = graph.n
    if n < 2:
        raise ValueError("need at least two items to build a tree")
    weights = graph.edge_weights(UTILITY_FLOOR)
    if not np.isfinite(weights[~np.eye(n, dtype=bool)]).all():
        raise ValueError("utility graph produced non-finite edge weights")

    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    edges: list[tuple[int, int]] = []
    for _ in range(n - 1):
        tree = np.nonzero(in_tree)[0]
        rest = np.nonzero(~in_tree)[0]
        crossing = weights[np.ix_(tree, rest)]
        lightest = crossing.min()
        ties = np.argwhere(crossing == lightest)
        candidates = [
            (min(int(tree[a]), int(rest[b])), max(int(tree[a]), int(rest[b])))
            for a, b in ties
        ]
        i, j = min(candidates)
        edges.append((i, j))
        in_tree[j if in_tree[i] else i] = True
    return PairBatch(tuple(edges))


def next_batch(graph: UtilityGraph, state: SamplerState) -> PairBatch:
    """Hybrid selection: single best pair within the first standard trial
    of observed votes (inclusive boundary), spanning-tree batch after."""
    if graph.n != state.n:
        raise ValueError("utility graph and sampler state disagree on item count")
    if state.observed_votes <= state.standard_trial_votes:
        return PairBatch((select_gm(graph),))
    return select_mst(graph)

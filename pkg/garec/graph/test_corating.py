# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

import os
import tempfile
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from garec.data import from_arrays, from_dense
from garec.graph import (
    NeighborList,
    build_corating_graph,
    build_item_corating,
    build_user_corating,
    dump_graph,
    edge_neighborhoods,
    merge_neighborhoods,
    target_item_neighbors,
    target_user_neighbors,
)
from garec.utils.testing import random_matrix


def brute_force_weights(dense: np.ndarray) -> dict[tuple[int, int], int]:
    """Co-rating weights by a triple loop over (u, y, i) on integer ratings."""
    weights = {}
    n, m = dense.shape
    for u in range(n):
        for y in range(n):
            if u == y:
                continue
            total = 0
            for i in range(m):
                if dense[u, i] and dense[y, i]:
                    total += int(dense[u, i]) * int(dense[y, i])
            if total:
                weights[(u, y)] = total
    return weights


class TestCoRating(unittest.TestCase):
    def test_hand_example(self):
        # u=0 rated {i0:5, i1:3}; y=1 rated {i0:4, i1:2, i2:1}
        R = from_dense([[5, 3, 0], [4, 2, 1], [0, 0, 0]])
        lists = build_user_corating(R)
        self.assertEqual(lists[0].entries, [(1, 26.0)])
        self.assertEqual(lists[1].entries, [(0, 26.0)])
        self.assertEqual(len(lists[2]), 0)

    def test_item_hand_example(self):
        R = from_dense([[5, 2, 0], [0, 0, 3]])
        lists = build_item_corating(R)
        self.assertEqual(lists[0].entries, [(1, 10.0)])
        self.assertEqual(len(lists[2]), 0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 100_000))
    def test_matches_triple_loop(self, seed):
        R = random_matrix(seed, 8, 8, density=0.4)
        dense = R.to_dense()
        expected = brute_force_weights(dense)
        lists = build_user_corating(R, cap=64)
        found = {(u, y): w for u, nl in enumerate(lists) for y, w in nl.entries}
        self.assertEqual(found, {key: float(w) for key, w in expected.items()})
        for (u, y), w in found.items():
            self.assertEqual(found[(y, u)], w)
            self.assertNotEqual(u, y)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 100_000), st.integers(1, 5))
    def test_item_lists_equal_user_lists_of_transpose(self, seed, cap):
        R = random_matrix(seed, 6, 7, density=0.5)
        items = build_item_corating(R, cap)
        mirrored = build_user_corating(R.transpose(), cap)
        self.assertEqual([nl.entries for nl in items], [nl.entries for nl in mirrored])

    def test_cap_keeps_heaviest_with_id_tie_break(self):
        R = from_dense([[2, 2, 0], [1, 0, 0], [0, 1, 0], [2, 2, 2]])
        lists = build_user_corating(R, cap=2)
        # weights for user 0: y1=2, y2=2, y3=8
        self.assertEqual(lists[0].entries, [(3, 8.0), (1, 2.0)])

    def test_parallel_build_is_identical(self):
        R = random_matrix(9, 40, 30, density=0.3)
        serial = build_user_corating(R, cap=5)
        parallel = build_user_corating(R, cap=5, n_jobs=2)
        self.assertEqual([nl.entries for nl in serial], [nl.entries for nl in parallel])

    def test_dump_format(self):
        R = from_dense([[5, 3, 0], [4, 2, 1], [0, 0, 0]])
        with tempfile.TemporaryDirectory() as tmp:
            path = dump_graph(build_user_corating(R), os.path.join(tmp, "graph.txt"))
            with open(path, encoding="utf-8") as handle:
                self.assertEqual(handle.read().splitlines(), ["0: (1,26)", "1: (0,26)", "2:"])


class TestTargetNeighbors(unittest.TestCase):
    def setUp(self):
        # item 0 rated by u1:4, u2:5, u0:3; user 0 rated j1:2, j2:5, i0:3
        self.R = from_arrays([0, 1, 2, 0, 0], [0, 0, 0, 1, 2], [3, 4, 5, 2, 5], 3, 4)

    def test_user_side_excludes_target_user(self):
        self.assertEqual(target_user_neighbors(self.R, 0, 0).entries, [(2, 5.0), (1, 4.0)])
        self.assertEqual(len(target_user_neighbors(self.R, 0, 3)), 0)
        self.assertEqual(target_user_neighbors(self.R, 2, 0, cap=1).entries, [(1, 4.0)])

    def test_item_side_excludes_target_item(self):
        self.assertEqual(target_item_neighbors(self.R, 0, 0).entries, [(2, 5.0), (1, 2.0)])
        self.assertEqual(target_item_neighbors(self.R, 0, 0, cap=1).entries, [(2, 5.0)])
        self.assertEqual(len(target_item_neighbors(self.R, 1, 0)), 0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 100_000))
    def test_self_exclusion(self, seed):
        R = random_matrix(seed, 5, 5)
        for u in range(5):
            for i in range(5):
                self.assertNotIn(u, target_user_neighbors(R, u, i).ids.tolist())
                self.assertNotIn(i, target_item_neighbors(R, u, i).ids.tolist())


class TestMerge(unittest.TestCase):
    def test_duplicate_sums_normalized_weights(self):
        merged = merge_neighborhoods(NeighborList.from_pairs([(7, 26)]), NeighborList.from_pairs([(7, 5)]))
        self.assertEqual(merged.entries, [(7, 2.0)])

    def test_one_side_empty(self):
        merged = merge_neighborhoods(NeighborList.empty(), NeighborList.from_pairs([(1, 4), (2, 2)]))
        self.assertEqual(merged.entries, [(1, 1.0), (2, 0.5)])

    def test_disjoint_union(self):
        merged = merge_neighborhoods(
            NeighborList.from_pairs([(1, 10), (2, 5)]), NeighborList.from_pairs([(3, 4), (4, 1)]), cap=4
        )
        self.assertEqual(merged.entries, [(1, 1.0), (3, 1.0), (2, 0.5), (4, 0.25)])

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 100_000))
    def test_edge_neighborhood_invariants(self, seed):
        R = random_matrix(seed, 6, 6, density=0.5)
        graph = build_corating_graph(R, cap=3)
        for u, i in [(0, 0), (5, 5), (2, 4)]:
            for nl in edge_neighborhoods(R, graph, u, i):
                self.assertLessEqual(len(nl), 3)
                self.assertTrue(np.all(nl.weights > 0))
                self.assertTrue(np.all(nl.weights <= 2.0))
                self.assertEqual(len(set(nl.ids.tolist())), len(nl))

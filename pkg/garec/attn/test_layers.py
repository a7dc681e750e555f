# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from garec.attn import (
    AttentionParams,
    activate,
    aggregate,
    attention_coefs,
    embed_node,
    relevance,
    self_neighbor_weights,
    transform,
    update,
)
from garec.exceptions import ValidationError
from garec.graph import NeighborList


class TestTransformAndRelevance(unittest.TestCase):
    def test_transform(self):
        f = np.array([1.0, 2.0])
        np.testing.assert_array_equal(transform(f, np.eye(2)), f)
        np.testing.assert_array_equal(transform(np.zeros(2), np.ones((2, 3))), np.zeros(3))
        np.testing.assert_array_equal(transform(f, np.array([[1.0, 0.0], [0.0, 3.0]])), [1.0, 6.0])
        with self.assertRaises(ValidationError):
            transform(f, np.eye(3))

    def test_relevance(self):
        self.assertEqual(relevance(np.ones(2), np.ones(2), 2.0), 4.0)
        self.assertEqual(relevance(np.array([1.0, 0.0]), np.array([0.0, 1.0]), 7.0), 0.0)
        q = np.array([0.3, -2.0])
        self.assertAlmostEqual(relevance(q, q, 1.0), float(q @ q))
        with self.assertRaises(ValidationError):
            relevance(q, q, 0.0)


class TestAttentionCoefs(unittest.TestCase):
    def test_equal_scores(self):
        coefs = attention_coefs([0.7, 0.7, 0.7])
        self.assertEqual([index for index, _ in coefs], [0, 1, 2])
        for _, coef in coefs:
            self.assertAlmostEqual(coef, 1 / 3, places=12)

    def test_prune_then_mask(self):
        self.assertEqual(attention_coefs([2.0, 1.0, -3.0]), [(0, 1.0)])

    def test_underflowed_weight_is_dropped(self):
        # exp(1200 - 2000) is 0 in float64
        self.assertEqual(attention_coefs([2000.0, 1200.0, 1.0]), [(0, 1.0)])

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-3000, 3000, allow_nan=False), min_size=1, max_size=12))
    def test_wide_scores_keep_coefficients_positive(self, rels):
        for _, coef in attention_coefs(rels):
            self.assertGreater(coef, 0.0)
            self.assertLessEqual(coef, 1.0)

    def test_all_pruned(self):
        self.assertEqual(attention_coefs([-1.0, -2.0]), [])
        self.assertEqual(attention_coefs([]), [])
        self.assertEqual(attention_coefs([0.0]), [])

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-10, 10, allow_nan=False), max_size=12))
    def test_normalization_and_pruning(self, rels):
        coefs = attention_coefs(rels)
        survivors = [r for r in rels if r > 0]
        if not survivors:
            self.assertEqual(coefs, [])
            return
        self.assertAlmostEqual(sum(c for _, c in coefs), 1.0, delta=1e-9)
        for index, coef in coefs:
            self.assertGreater(rels[index], 0)
            self.assertGreater(coef, 0.0)
            self.assertLessEqual(coef, 1.0)
        self.assertIn(int(np.argmax(rels)), [index for index, _ in coefs])

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(
            st.floats(-5, 5, allow_nan=False, allow_subnormal=False).filter(lambda x: x == 0 or abs(x) > 1e-200),
            min_size=1,
            max_size=10,
        ),
        st.sampled_from([0.5, 2.0, 4.0, 0.125]),
    )
    def test_positive_scaling_keeps_support(self, rels, factor):
        # power-of-two factors scale every score exactly
        before = [index for index, _ in attention_coefs(rels)]
        after = [index for index, _ in attention_coefs([factor * r for r in rels])]
        self.assertEqual(before, after)


class TestAggregateAndUpdate(unittest.TestCase):
    def test_aggregate(self):
        keys = np.array([[1.0, 2.0], [3.0, 0.0]])
        np.testing.assert_allclose(aggregate([(0, 0.5), (1, 0.5)], keys), [2.0, 1.0])
        np.testing.assert_array_equal(aggregate([(1, 1.0)], keys), keys[1])
        np.testing.assert_array_equal(aggregate([], np.zeros((0, 3)), dim=3), np.zeros(3))

    def test_self_neighbor_weights(self):
        self.assertEqual(self_neighbor_weights(1.5, 1.5), (0.5, 0.5))
        a_s, a_n = self_neighbor_weights(1000.0, 0.0)
        self.assertEqual((a_s, a_n), (1.0, 0.0))

    def test_update_with_zero_neighborhood(self):
        p = AttentionParams(np.zeros((2, 2)), np.eye(2), np.array([[1.0, 2.0], [0.0, 1.0]]))
        f = np.array([1.0, 1.0])
        out = update(f, np.zeros(2), np.zeros(2), p, "identity")
        np.testing.assert_allclose(out, 0.5 * (f @ p.w_self))

    def test_update_identity_is_convex_combination(self):
        rng = np.random.default_rng(0)
        p = AttentionParams(rng.normal(size=(3, 2)), rng.normal(size=(2, 2)), rng.normal(size=(3, 2)))
        f, f_nei = rng.normal(size=3), rng.normal(size=2)
        q = f @ p.W
        a_s, a_n = self_neighbor_weights(float(q @ (f @ p.w_self)), float(q @ (f_nei @ p.w_nei)))
        np.testing.assert_allclose(update(f, f_nei, q, p, "identity"), a_s * (f @ p.w_self) + a_n * f_nei)

    def test_activations(self):
        z = np.array([-1.0, 0.5])
        np.testing.assert_array_equal(activate(z, "relu"), [0.0, 0.5])
        np.testing.assert_array_equal(activate(z, "identity"), z)
        with self.assertRaises(ValidationError):
            activate(z, "swish")


class TestEmbedNode(unittest.TestCase):
    def test_hand_trace(self):
        table = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        params = AttentionParams(np.eye(2), np.eye(2), np.array([[2.0, 0.0], [0.0, 1.0]]))
        neighbors = NeighborList(np.array([1, 2]), np.array([1.0, 0.5]))
        vec, fallback = embed_node(table[0], table, neighbors, params, "tanh")
        # neighbor 2 is orthogonal and pruned; rel_self = 2, rel_nei = 1
        alpha_self = math.exp(1) / (1 + math.exp(1))
        self.assertFalse(fallback)
        self.assertAlmostEqual(vec[0], math.tanh(2 * alpha_self + (1 - alpha_self)), places=12)
        self.assertEqual(vec[1], 0.0)

    def test_fallbacks(self):
        table = np.array([[1.0, 0.0], [-1.0, 0.0]])
        params = AttentionParams(np.eye(2), np.eye(2), np.eye(2))
        expected = np.tanh(table[0])
        vec, fallback = embed_node(table[0], table, NeighborList.empty(), params, "tanh")
        self.assertTrue(fallback)
        np.testing.assert_array_equal(vec, expected)
        vec, fallback = embed_node(table[0], table, NeighborList(np.array([1]), np.array([1.0])), params, "tanh")
        self.assertTrue(fallback)
        np.testing.assert_array_equal(vec, expected)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 100_000))
    def test_neighbor_order_does_not_matter(self, seed):
        rng = np.random.default_rng(seed)
        table = rng.normal(size=(8, 3))
        params = AttentionParams(rng.normal(size=(3, 2)), rng.normal(size=(2, 2)), rng.normal(size=(3, 2)))
        ids = rng.permutation(7)[: rng.integers(1, 7)] + 1
        weights = rng.uniform(0.1, 2.0, size=len(ids))
        perm = rng.permutation(len(ids))
        a, _ = embed_node(table[0], table, NeighborList(ids, weights), params, "tanh")
        b, _ = embed_node(table[0], table, NeighborList(ids[perm], weights[perm]), params, "tanh")
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)

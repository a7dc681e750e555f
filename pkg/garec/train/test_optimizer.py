# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

import unittest

import numpy as np

from garec.exceptions import ValidationError
from garec.train import AdamState, step
from garec.utils.testing import random_state


class TestAdam(unittest.TestCase):
    def setUp(self):
        self.state = random_state(5, 4, 3, 2, 2)

    def test_zero_gradient_leaves_parameters(self):
        grads = {name: np.zeros_like(t) for name, t in self.state.tensors().items()}
        new_state, opt = step(self.state, grads, AdamState(), 0.01)
        self.assertEqual(opt.t, 1)
        for name, tensor in self.state.tensors().items():
            self.assertEqual(new_state.tensors()[name].tobytes(), tensor.tobytes(), name)

    def test_unit_gradient_moves_by_learning_rate(self):
        grads = {name: np.ones_like(t) for name, t in self.state.tensors().items()}
        new_state, _ = step(self.state, grads, AdamState(), 0.01)
        for name, tensor in self.state.tensors().items():
            np.testing.assert_allclose(tensor - new_state.tensors()[name], 0.01, rtol=1e-6, err_msg=name)

    def test_inputs_are_not_modified(self):
        before = {name: t.copy() for name, t in self.state.tensors().items()}
        grads = {name: np.ones_like(t) for name, t in self.state.tensors().items()}
        opt = AdamState()
        _, new_opt = step(self.state, grads, opt, 0.01)
        self.assertEqual(opt.t, 0)
        self.assertEqual(opt.m, {})
        self.assertEqual(new_opt.t, 1)
        for name, tensor in self.state.tensors().items():
            self.assertEqual(tensor.tobytes(), before[name].tobytes(), name)

    def test_frozen_factors_stay_bit_identical(self):
        state = random_state(5, 4, 3, 2, 2, freeze_factors=True)
        grads = {name: np.ones_like(state.tensors()[name]) for name in state.trainable_names()}
        new_state, opt = step(state, grads, AdamState(), 0.1)
        self.assertNotIn("factors.user", opt.m)
        self.assertEqual(new_state.factors.user.tobytes(), state.factors.user.tobytes())
        self.assertEqual(new_state.factors.item.tobytes(), state.factors.item.tobytes())
        self.assertFalse(np.array_equal(new_state.user_attn.W, state.user_attn.W))

    def test_bad_gradients(self):
        grads = {name: np.zeros_like(t) for name, t in self.state.tensors().items()}
        missing = dict(grads)
        del missing["user_attn.W"]
        with self.assertRaises(ValidationError):
            step(self.state, missing, AdamState(), 0.01)
        grads["mlp.0.bias"] = np.zeros(7)
        with self.assertRaises(ValidationError):
            step(self.state, grads, AdamState(), 0.01)
        with self.assertRaises(ValidationError):
            step(self.state, grads, AdamState(), 0.0)

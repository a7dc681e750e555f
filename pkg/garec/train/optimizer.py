# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from garec.attn import ModelState
from garec.utils import require_positive, throw

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass(eq=False)
class AdamState:
    """First/second moment estimates per tensor name and the step counter."""

    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def copy(self) -> AdamState:
        return AdamState(
            self.t,
            {name: value.copy() for name, value in self.m.items()},
            {name: value.copy() for name, value in self.v.items()},
        )


def step(
    state: ModelState,
    grads: dict[str, np.ndarray],
    opt_state: AdamState,
    lr: float,
) -> tuple[ModelState, AdamState]:
    """One adaptive-moment update of every trainable tensor.

    Returns a new ModelState and AdamState; neither input is modified, so forward passes that
    still hold the old state keep reading consistent parameters.
    """
    require_positive("learning_rate", lr)
    tensors = state.tensors()
    t = opt_state.t + 1
    m, v = dict(opt_state.m), dict(opt_state.v)
    updates = {}
    for name in state.trainable_names():
        param = tensors[name]
        grad = grads.get(name)
        if grad is None:
            throw(f"Missing gradient for {name}")
        if grad.shape != param.shape:
            throw(f"Gradient for {name} has shape {grad.shape}, parameter has {param.shape}")
        m[name] = BETA1 * m.get(name, np.zeros_like(param)) + (1.0 - BETA1) * grad
        v[name] = BETA2 * v.get(name, np.zeros_like(param)) + (1.0 - BETA2) * grad**2
        m_hat = m[name] / (1.0 - BETA1**t)
        v_hat = v[name] / (1.0 - BETA2**t)
        updates[name] = param - lr * m_hat / (np.sqrt(v_hat) + EPSILON)
    return state.replace_tensors(updates), AdamState(t, m, v)

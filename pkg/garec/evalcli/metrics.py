# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from __future__ import annotations

import numpy as np

from garec.utils import throw

RATING_BOUNDS = (1.0, 5.0)


def _errors(pairs, bounds: tuple[float, float] = RATING_BOUNDS) -> np.ndarray:
    values = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs, dtype=np.float64)
    if values.size == 0:
        throw("Cannot score an empty list of (prediction, truth) pairs")
    if values.ndim != 2 or values.shape[1] != 2:
        throw(f"Expected (prediction, truth) pairs, got an array of shape {values.shape}")
    return np.clip(values[:, 0], *bounds) - values[:, 1]


def rmse(pairs, bounds: tuple[float, float] = RATING_BOUNDS) -> float:
    """Root mean squared error, predictions clamped to ``bounds`` first."""
    errors = _errors(pairs, bounds)
    return float(np.sqrt(np.sum(errors**2) / len(errors)))


def mae(pairs, bounds: tuple[float, float] = RATING_BOUNDS) -> float:
    errors = _errors(pairs, bounds)
    return float(np.sum(np.abs(errors)) / len(errors))

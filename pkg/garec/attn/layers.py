"""
Single-edge attention operations.

Aggregator: query q = f W from the node's own vector, keys k_y = f_y W from its neighbors,
relevance rel_y = a_y (q . k_y), rectifier pruning, below-mean masking, softmax, weighted sum
of keys. Updater: a second two-way softmax weighs the node's own projection f w_self against
the aggregated neighborhood.

These functions are the reference semantics; ``garec.attn.batch`` evaluates the same
arithmetic over padded batches.
"""

from __future__ import annotations

import numpy as np

from garec.utils import throw

from .state import AttentionParams


def activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "tanh":
        return np.tanh(z)
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "identity":
        return z
    throw(f"Unknown activation {activation!r}")


def activation_grad(z: np.ndarray, out: np.ndarray, activation: str) -> np.ndarray:
    """d activation / d z, elementwise."""
    if activation == "tanh":
        return 1.0 - out**2
    if activation == "relu":
        return (z > 0).astype(z.dtype)
    return np.ones_like(z)


def transform(f: np.ndarray, W: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.shape[-1] != W.shape[0]:
        throw(f"Cannot transform a {f.shape[-1]}-vector with a {W.shape[0]}x{W.shape[1]} matrix")
    return f @ W


def relevance(q: np.ndarray, k: np.ndarray, a: float) -> float:
    if a <= 0:
        throw(f"Edge weight must be > 0, got {a}")
    return float(a * np.dot(q, k))


def attention_coefs(rels) -> list[tuple[int, float]]:
    """Turn relevance scores into (index, coefficient) pairs.

    Scores <= 0 are dropped and survivors strictly below the survivors' mean are masked. The rest
    go through a softmax; entries whose weight underflows to 0 are dropped too, so every returned
    coefficient lies in (0, 1]. Returns an empty list when nothing survives.
    """
    rels = np.asarray(rels, dtype=np.float64)
    survivors = np.flatnonzero(rels > 0)
    if not len(survivors):
        return []
    values = rels[survivors]
    top = values.max()
    # the maximum always stays, even when rounding pushes the mean past it
    threshold = min(values.sum() / len(values), top)
    kept = survivors[values >= threshold]
    weights = np.exp(rels[kept] - top)
    # entries whose softmax weight underflows to 0 leave the neighborhood
    live = weights > 0
    kept, weights = kept[live], weights[live]
    coefs = weights / weights.sum()
    return list(zip(kept.tolist(), coefs.tolist(), strict=True))


def aggregate(coefs: list[tuple[int, float]], keys, dim: int | None = None) -> np.ndarray:
    """Coefficient-weighted sum of neighbor keys; zero vector when there are no coefficients."""
    keys = np.asarray(keys, dtype=np.float64)
    width = keys.shape[1] if keys.ndim == 2 else dim
    if width is None:
        throw("aggregate needs the key width when no keys are given")
    result = np.zeros(width)
    for index, coef in coefs:
        if index >= len(keys):
            throw(f"Coefficient index {index} has no key")
        result = result + coef * keys[index]
    return result


def self_neighbor_weights(rel_self: float, rel_nei: float) -> tuple[float, float]:
    """Two-way softmax over (rel_self, rel_nei)."""
    top = max(rel_self, rel_nei)
    e_self = np.exp(rel_self - top)
    e_nei = np.exp(rel_nei - top)
    total = e_self + e_nei
    return float(e_self / total), float(e_nei / total)


def update(
    f: np.ndarray,
    f_nei: np.ndarray,
    q: np.ndarray,
    p: AttentionParams,
    activation: str = "tanh",
) -> np.ndarray:
    """New embedding activation(alpha_self * f w_self + alpha_nei * f_nei)."""
    own = transform(f, p.w_self)
    if np.shape(f_nei) != own.shape or np.shape(q) != own.shape:
        throw(f"update needs d'-vectors of width {own.shape[0]}")
    rel_self = float(np.dot(q, own))
    rel_nei = float(np.dot(q, f_nei @ p.w_nei))
    alpha_self, alpha_nei = self_neighbor_weights(rel_self, rel_nei)
    return activate(alpha_self * own + alpha_nei * f_nei, activation)

"""
Loss and exact gradients for a batch of rating records.

This module handles:
- batch_loss: mean squared error of raw (unclamped) predictions
- gradients: hand-derived adjoints of the batched forward pass
- The data-parallel mode: a fixed partition of the batch into chunks whose summed
  gradients are reduced in chunk order

Attention masks (rectifier survivors and the below-mean mask) are read from the forward pass
and held fixed; derivatives flow through the softmax over the kept set only.
"""

from __future__ import annotations

import numpy as np
from joblib import Parallel, delayed

from garec.attn import EdgeBatch, ModelState, SideCache, activation_grad, build_edge_batch, forward_batch
from garec.attn.state import AttentionParams
from garec.data import RatingRecord, SparseRatings
from garec.exceptions import DivergenceError
from garec.graph import CoRatingGraph
from garec.utils import logger, throw

LOGGER = logger("train")

GradientSet = dict[str, np.ndarray]


def as_edge_batch(batch, graph: CoRatingGraph, R: SparseRatings) -> EdgeBatch:
    """Accept a prebuilt EdgeBatch or any sequence of RatingRecord."""
    if isinstance(batch, EdgeBatch):
        edge_batch = batch
    else:
        records: list[RatingRecord] = list(batch)
        edge_batch = build_edge_batch(
            R,
            graph,
            [r.user_id for r in records],
            [r.item_id for r in records],
            [r.rating for r in records],
        )
    if not len(edge_batch):
        throw("Batch must not be empty")
    return edge_batch


def batch_loss(batch, state: ModelState, graph: CoRatingGraph, R: SparseRatings) -> float:
    edge_batch = as_edge_batch(batch, graph, R)
    residual = forward_batch(state, edge_batch).raw - edge_batch.ratings
    return float(np.mean(residual**2))


def _slice(batch: EdgeBatch, rows: np.ndarray) -> EdgeBatch:
    def side(nbr):
        return type(nbr)(nbr.ids[rows], nbr.weights[rows], nbr.valid[rows])

    return EdgeBatch(
        batch.users[rows],
        batch.items[rows],
        batch.ratings[rows],
        side(batch.user_side),
        side(batch.item_side),
    )


def _side_backward(
    cache: SideCache,
    d_out: np.ndarray,
    params: AttentionParams,
    activation: str,
    d_table: np.ndarray | None,
    prefix: str,
    grads: GradientSet,
) -> None:
    dz = d_out * activation_grad(cache.z, cache.out, activation)
    a_s = cache.alpha_self[:, None]
    a_n = cache.alpha_nei[:, None]

    d_own = a_s * dz
    d_fnei = a_n * dz
    d_alpha_self = (dz * cache.own).sum(axis=1)
    d_alpha_nei = (dz * cache.f_nei).sum(axis=1)

    # fallback rows have alpha_self = 1, alpha_nei = 0, which zeroes both terms
    mixed = cache.alpha_self * d_alpha_self + cache.alpha_nei * d_alpha_nei
    d_rel_self = cache.alpha_self * (d_alpha_self - mixed)
    d_rel_nei = cache.alpha_nei * (d_alpha_nei - mixed)

    dq = d_rel_self[:, None] * cache.own + d_rel_nei[:, None] * cache.nei_proj
    d_own += d_rel_self[:, None] * cache.q
    d_nei_proj = d_rel_nei[:, None] * cache.q

    grads[f"{prefix}.w_nei"] = cache.f_nei.T @ d_nei_proj
    d_fnei += d_nei_proj @ params.w_nei.T
    grads[f"{prefix}.w_self"] = cache.f.T @ d_own
    df = d_own @ params.w_self.T

    d_coef = np.einsum("bk,btk->bt", d_fnei, cache.keys)
    d_keys = cache.coef[:, :, None] * d_fnei[:, None, :]
    d_rel = cache.coef * (d_coef - (cache.coef * d_coef).sum(axis=1, keepdims=True))
    d_rel = np.where(cache.kept, d_rel, 0.0)

    d_dot = d_rel * cache.nbr.weights
    dq += np.einsum("bt,btk->bk", d_dot, cache.keys)
    d_keys += d_dot[:, :, None] * cache.q[:, None, :]

    d_key_transform = np.einsum("btd,btk->dk", cache.neighbor_f, d_keys)
    grads[f"{prefix}.W"] = cache.f.T @ dq
    if params.W_key is None:
        grads[f"{prefix}.W"] += d_key_transform
    else:
        grads[f"{prefix}.W_key"] = d_key_transform
    df += dq @ params.W.T

    if d_table is not None:
        d_neighbor_f = (d_keys @ params.key_transform.T) * cache.nbr.valid[:, :, None]
        np.add.at(d_table, cache.self_ids, df)
        np.add.at(d_table, cache.nbr.ids.ravel(), d_neighbor_f.reshape(-1, d_neighbor_f.shape[-1]))


def _summed_gradients(state: ModelState, batch: EdgeBatch) -> tuple[float, GradientSet]:
    """Summed (not averaged) squared error over ``batch`` and its gradients."""
    cache = forward_batch(state, batch)
    grads: GradientSet = {}

    residual = cache.raw - batch.ratings
    delta = (2.0 * residual)[:, None]
    last = len(state.mlp.layers) - 1
    for index in range(last, -1, -1):
        weight, _ = state.mlp.layers[index]
        if index != last:
            delta = delta * (cache.mlp_pre[index] > 0)
        grads[f"mlp.{index}.weight"] = cache.mlp_inputs[index].T @ delta
        grads[f"mlp.{index}.bias"] = delta.sum(axis=0)
        delta = delta @ weight.T

    dp = state.d_prime
    d_user = None if state.freeze_factors else np.zeros_like(state.factors.user)
    d_item = None if state.freeze_factors else np.zeros_like(state.factors.item)
    _side_backward(cache.user, delta[:, :dp], state.user_attn, state.activation, d_user, "user_attn", grads)
    _side_backward(cache.item, delta[:, dp:], state.item_attn, state.activation, d_item, "item_attn", grads)
    if not state.freeze_factors:
        grads["factors.user"] = d_user
        grads["factors.item"] = d_item
    return float(np.sum(residual**2)), grads


def partition(size: int, n_chunks: int) -> list[np.ndarray]:
    """Stable split of ``range(size)`` into at most ``n_chunks`` contiguous, non-empty chunks."""
    return [chunk for chunk in np.array_split(np.arange(size), max(1, min(n_chunks, size))) if len(chunk)]


def loss_and_gradients(
    batch,
    state: ModelState,
    graph: CoRatingGraph,
    R: SparseRatings,
    n_jobs: int = 1,
) -> tuple[float, GradientSet]:
    """``batch_loss`` and its exact partial derivatives for every trainable tensor of ``state``.

    With ``n_jobs > 1`` the batch is cut into ``n_jobs`` contiguous chunks evaluated on worker
    threads; chunk sums are added in chunk order before dividing by the batch size.
    """
    edge_batch = as_edge_batch(batch, graph, R)
    size = len(edge_batch)
    chunks = partition(size, n_jobs)
    if len(chunks) == 1:
        parts = [_summed_gradients(state, edge_batch)]
    else:
        parts = Parallel(n_jobs=len(chunks), prefer="threads")(
            delayed(_summed_gradients)(state, _slice(edge_batch, rows)) for rows in chunks
        )

    loss = sum(sse for sse, _ in parts) / size
    if not np.isfinite(loss):
        raise DivergenceError(f"Batch loss is not finite ({loss})", tensor="loss")
    grads: GradientSet = {}
    for name in state.trainable_names():
        total = parts[0][1][name].copy()
        for _, part in parts[1:]:
            total += part[name]
        total /= size
        if not np.isfinite(total).all():
            LOGGER.error(f"Non-finite gradient in {name} (batch of {size})")
            raise DivergenceError(f"Gradient of {name} is not finite", tensor=name)
        grads[name] = total
    return loss, grads


def gradients(
    batch,
    state: ModelState,
    graph: CoRatingGraph,
    R: SparseRatings,
    n_jobs: int = 1,
) -> GradientSet:
    return loss_and_gradients(batch, state, graph, R, n_jobs)[1]

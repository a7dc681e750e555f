"""
Vectorized forward pass over a batch of edges.

Neighborhoods are padded to the longest list in the batch; padding slots carry weight 0 and
``valid == False`` so they never survive the rectifier. The arithmetic mirrors
``garec.attn.layers`` step for step and keeps every intermediate needed by the backward pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from garec.data import SparseRatings
from garec.graph import CoRatingGraph, NeighborList, edge_neighborhoods

from .layers import activate
from .state import AttentionParams, ModelState


@dataclass(frozen=True, eq=False)
class Neighborhoods:
    """Padded neighbor ids, weights and validity mask, each (B, T)."""

    ids: np.ndarray
    weights: np.ndarray
    valid: np.ndarray

    @classmethod
    def pad(cls, lists: list[NeighborList]) -> Neighborhoods:
        width = max(1, max((len(nl) for nl in lists), default=0))
        ids = np.zeros((len(lists), width), dtype=np.int64)
        weights = np.zeros((len(lists), width))
        valid = np.zeros((len(lists), width), dtype=bool)
        for row, nl in enumerate(lists):
            size = len(nl)
            ids[row, :size] = nl.ids
            weights[row, :size] = nl.weights
            valid[row, :size] = True
        return cls(ids, weights, valid)


@dataclass(frozen=True, eq=False)
class EdgeBatch:
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray
    user_side: Neighborhoods
    item_side: Neighborhoods

    def __len__(self) -> int:
        return len(self.users)


def build_edge_batch(R: SparseRatings, graph: CoRatingGraph, users, items, ratings=None) -> EdgeBatch:
    """Gather the merged neighborhoods of every (u, i) pair from the training matrix."""
    users = np.asarray(users, dtype=np.int64)
    items = np.asarray(items, dtype=np.int64)
    ratings = np.zeros(len(users)) if ratings is None else np.asarray(ratings, dtype=np.float64)
    user_lists, item_lists = [], []
    for u, i in zip(users.tolist(), items.tolist(), strict=True):
        user_side, item_side = edge_neighborhoods(R, graph, u, i)
        user_lists.append(user_side)
        item_lists.append(item_side)
    return EdgeBatch(users, items, ratings, Neighborhoods.pad(user_lists), Neighborhoods.pad(item_lists))


@dataclass(eq=False)
class SideCache:
    """Intermediates of one side (user or item) of the forward pass."""

    self_ids: np.ndarray
    nbr: Neighborhoods
    f: np.ndarray
    q: np.ndarray
    neighbor_f: np.ndarray
    keys: np.ndarray
    rel: np.ndarray
    survivors: np.ndarray
    kept: np.ndarray
    coef: np.ndarray
    f_nei: np.ndarray
    has_neighbors: np.ndarray
    own: np.ndarray
    nei_proj: np.ndarray
    alpha_self: np.ndarray
    alpha_nei: np.ndarray
    z: np.ndarray
    out: np.ndarray


def side_forward(
    table: np.ndarray,
    self_ids: np.ndarray,
    nbr: Neighborhoods,
    params: AttentionParams,
    activation: str,
) -> SideCache:
    f = table[self_ids]
    q = f @ params.W
    neighbor_f = table[nbr.ids]
    keys = neighbor_f @ params.key_transform
    rel = nbr.weights * np.einsum("bk,btk->bt", q, keys)

    survivors = nbr.valid & (rel > 0)
    count = survivors.sum(axis=1)
    has_survivors = count > 0
    mean = np.where(survivors, rel, 0.0).sum(axis=1) / np.maximum(count, 1)
    top = np.where(has_survivors, np.where(survivors, rel, -np.inf).max(axis=1), 0.0)
    threshold = np.minimum(mean, top)
    kept = survivors & (rel >= threshold[:, None])
    exp = np.where(kept, np.exp(np.where(kept, rel - top[:, None], 0.0)), 0.0)
    # entries whose softmax weight underflows to 0 leave the neighborhood
    kept &= exp > 0
    has_neighbors = kept.any(axis=1)

    total = exp.sum(axis=1)
    coef = exp / np.where(total > 0, total, 1.0)[:, None]
    f_nei = np.einsum("bt,btk->bk", coef, keys)

    own = f @ params.w_self
    nei_proj = f_nei @ params.w_nei
    rel_self = (q * own).sum(axis=1)
    rel_nei = (q * nei_proj).sum(axis=1)
    peak = np.maximum(rel_self, rel_nei)
    e_self = np.exp(rel_self - peak)
    e_nei = np.exp(rel_nei - peak)
    alpha_self = np.where(has_neighbors, e_self / (e_self + e_nei), 1.0)
    alpha_nei = np.where(has_neighbors, e_nei / (e_self + e_nei), 0.0)

    z = alpha_self[:, None] * own + alpha_nei[:, None] * f_nei
    out = activate(z, activation)
    return SideCache(
        self_ids, nbr, f, q, neighbor_f, keys, rel, survivors, kept, coef, f_nei,
        has_neighbors, own, nei_proj, alpha_self, alpha_nei, z, out,
    )


@dataclass(eq=False)
class ForwardCache:
    user: SideCache
    item: SideCache
    mlp_inputs: list[np.ndarray]
    mlp_pre: list[np.ndarray]
    raw: np.ndarray

    @property
    def cold_fallback(self) -> np.ndarray:
        """True where either endpoint was embedded without any usable neighbor."""
        return ~(self.user.has_neighbors & self.item.has_neighbors)

    def mask_signature(self) -> bytes:
        """Fingerprint of every piecewise decision (rectifier, mean mask, hidden units)."""
        parts = [self.user.survivors, self.user.kept, self.item.survivors, self.item.kept]
        parts += [pre > 0 for pre in self.mlp_pre[:-1]]
        parts += [self.user.z > 0, self.item.z > 0]
        return b"|".join(np.packbits(p.astype(bool)).tobytes() for p in parts)


def forward_batch(state: ModelState, batch: EdgeBatch) -> ForwardCache:
    user = side_forward(state.factors.user, batch.users, batch.user_side, state.user_attn, state.activation)
    item = side_forward(state.factors.item, batch.items, batch.item_side, state.item_attn, state.activation)
    x = np.concatenate([user.out, item.out], axis=1)
    out, inputs, pre = state.mlp.forward(x)
    return ForwardCache(user, item, inputs, pre, out[:, 0])


def predict_batch(state: ModelState, batch: EdgeBatch, clamp: bool = True) -> np.ndarray:
    raw = forward_batch(state, batch).raw
    if clamp:
        return np.clip(raw, *state.rating_bounds)
    return raw

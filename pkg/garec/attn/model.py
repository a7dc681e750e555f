# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from __future__ import annotations

import numpy as np

from garec.data import SparseRatings
from garec.graph import CoRatingGraph, NeighborList, edge_neighborhoods

from .layers import activate, aggregate, attention_coefs, relevance, transform, update
from .state import AttentionParams, ModelState


def embed_node(
    f: np.ndarray,
    table: np.ndarray,
    neighbors: NeighborList,
    params: AttentionParams,
    activation: str,
) -> tuple[np.ndarray, bool]:
    """Embed one node from its own vector and weighted neighbors drawn from ``table``.

    Returns (embedding, used_fallback). The fallback activation(f w_self) applies when no
    neighbor keeps a positive attention coefficient, including the empty neighborhood.
    """
    if not len(neighbors):
        return activate(transform(f, params.w_self), activation), True
    q = transform(f, params.W)
    keys = transform(table[neighbors.ids], params.key_transform)
    rels = [relevance(q, k, a) for k, a in zip(keys, neighbors.weights, strict=True)]
    coefs = attention_coefs(rels)
    if not coefs:
        return activate(transform(f, params.w_self), activation), True
    f_nei = aggregate(coefs, keys)
    return update(f, f_nei, q, params, activation), False


def _embed_user(u: int, state: ModelState, user_side: NeighborList) -> np.ndarray:
    table = state.factors.user
    return embed_node(table[u], table, user_side, state.user_attn, state.activation)[0]


def _embed_item(i: int, state: ModelState, item_side: NeighborList) -> np.ndarray:
    table = state.factors.item
    return embed_node(table[i], table, item_side, state.item_attn, state.activation)[0]


def embed_user_for_edge(
    u: int, i: int, state: ModelState, graph: CoRatingGraph, R: SparseRatings
) -> np.ndarray:
    user_side, _ = edge_neighborhoods(R, graph, u, i)
    return _embed_user(u, state, user_side)


def embed_item_for_edge(
    u: int, i: int, state: ModelState, graph: CoRatingGraph, R: SparseRatings
) -> np.ndarray:
    _, item_side = edge_neighborhoods(R, graph, u, i)
    return _embed_item(i, state, item_side)


def predict_edge(
    u: int,
    i: int,
    state: ModelState,
    graph: CoRatingGraph,
    R: SparseRatings,
    clamp: bool = True,
) -> float:
    """MLP rating for edge (u, i): clamped to the rating bounds for evaluation, raw for training."""
    user_side, item_side = edge_neighborhoods(R, graph, u, i)
    x = np.concatenate([_embed_user(u, state, user_side), _embed_item(i, state, item_side)])
    raw = float(state.mlp.forward(x)[0][0])
    if clamp:
        low, high = state.rating_bounds
        return float(min(max(raw, low), high))
    return raw

# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from .batch import (
    EdgeBatch,
    ForwardCache,
    Neighborhoods,
    SideCache,
    build_edge_batch,
    forward_batch,
    predict_batch,
    side_forward,
)
from .layers import (
    activate,
    activation_grad,
    aggregate,
    attention_coefs,
    relevance,
    self_neighbor_weights,
    transform,
    update,
)
from .model import embed_item_for_edge, embed_node, embed_user_for_edge, predict_edge
from .state import FACTOR_TENSORS, AttentionParams, MlpParams, ModelState, init_state

__all__ = [
    "FACTOR_TENSORS",
    "AttentionParams",
    "EdgeBatch",
    "ForwardCache",
    "MlpParams",
    "ModelState",
    "Neighborhoods",
    "SideCache",
    "activate",
    "activation_grad",
    "aggregate",
    "attention_coefs",
    "build_edge_batch",
    "embed_item_for_edge",
    "embed_node",
    "embed_user_for_edge",
    "forward_batch",
    "init_state",
    "predict_batch",
    "predict_edge",
    "relevance",
    "self_neighbor_weights",
    "side_forward",
    "transform",
    "update",
]

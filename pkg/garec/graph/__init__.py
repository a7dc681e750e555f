# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from .corating import (
    CoRatingGraph,
    build_corating_graph,
    build_item_corating,
    build_user_corating,
    dump_graph,
    edge_neighborhoods,
)
from .neighbors import (
    DEFAULT_CAP,
    NeighborList,
    merge_neighborhoods,
    target_item_neighbors,
    target_user_neighbors,
    top_weighted,
)

__all__ = [
    "DEFAULT_CAP",
    "CoRatingGraph",
    "NeighborList",
    "build_corating_graph",
    "build_item_corating",
    "build_user_corating",
    "dump_graph",
    "edge_neighborhoods",
    "merge_neighborhoods",
    "target_item_neighbors",
    "target_user_neighbors",
    "top_weighted",
]

"""
Co-rating neighborhoods.

This module handles:
- User-user weights w(u, y) = sum over items rated by both of r_ui * r_yi
- The item-item mirror, obtained by swapping the roles of users and items
- Per-edge neighborhoods combining co-rating and target lists
- A plain-text dump for debugging

Weights come from sparse row blocks of R . R^T: each block accumulates, for every item a user
rated, that item's rater row (an inverted-index walk over the by-item CSR view). Only the top
``cap`` entries of each row are kept, so no dense n x n matrix is ever held.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from garec.data import SparseRatings
from garec.utils import logger, throw

from .neighbors import (
    DEFAULT_CAP,
    NeighborList,
    merge_neighborhoods,
    target_item_neighbors,
    target_user_neighbors,
    top_weighted,
)

LOGGER = logger("graph")

BLOCK_ROWS = 256


@dataclass(frozen=True, eq=False)
class CoRatingGraph:
    user_lists: list[NeighborList]
    item_lists: list[NeighborList]
    cap: int

    @property
    def n_users(self) -> int:
        return len(self.user_lists)

    @property
    def n_items(self) -> int:
        return len(self.item_lists)


def _block_lists(R: SparseRatings, start: int, end: int, cap: int) -> list[NeighborList]:
    block = (R.by_user[start:end] @ R.by_item).tocsr()
    block.sort_indices()
    lists = []
    for offset in range(end - start):
        row = start + offset
        lo, hi = block.indptr[offset], block.indptr[offset + 1]
        ids = block.indices[lo:hi]
        weights = block.data[lo:hi]
        keep = (ids != row) & (weights > 0)
        lists.append(top_weighted(ids[keep], weights[keep], cap))
    return lists


def build_user_corating(
    R: SparseRatings,
    cap: int = DEFAULT_CAP,
    n_jobs: int = 1,
    progress: bool = False,
) -> list[NeighborList]:
    """Top-``cap`` co-rating neighbors of every user, self excluded.

    Rows are processed in fixed blocks; with ``n_jobs > 1`` blocks run on worker threads and
    are concatenated in block order, so the result does not depend on ``n_jobs``.
    """
    if R.nnz == 0:
        throw("Cannot build co-rating lists from an empty rating matrix")
    starts = list(range(0, R.n_users, BLOCK_ROWS))
    bounds = [(s, min(s + BLOCK_ROWS, R.n_users)) for s in starts]
    if n_jobs > 1:
        blocks = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_block_lists)(R, s, e, cap) for s, e in bounds
        )
    else:
        blocks = [
            _block_lists(R, s, e, cap)
            for s, e in tqdm(bounds, desc="Co-rating lists", disable=not progress)
        ]
    return [nl for block in blocks for nl in block]


def build_item_corating(
    R: SparseRatings,
    cap: int = DEFAULT_CAP,
    n_jobs: int = 1,
    progress: bool = False,
) -> list[NeighborList]:
    """Top-``cap`` co-rating neighbors of every item: w(i, j) = sum over shared raters of r_ui * r_uj."""
    return build_user_corating(R.transpose(), cap, n_jobs, progress)


def build_corating_graph(
    R: SparseRatings,
    cap: int = DEFAULT_CAP,
    n_jobs: int = 1,
    progress: bool = False,
) -> CoRatingGraph:
    user_lists = build_user_corating(R, cap, n_jobs, progress)
    item_lists = build_item_corating(R, cap, n_jobs, progress)
    graph = CoRatingGraph(user_lists, item_lists, cap)
    LOGGER.info(
        f"Co-rating graph (cap={cap}): {sum(map(len, user_lists))} user edges, "
        f"{sum(map(len, item_lists))} item edges"
    )
    return graph


def edge_neighborhoods(
    R: SparseRatings, graph: CoRatingGraph, u: int, i: int
) -> tuple[NeighborList, NeighborList]:
    """Merged (user-side, item-side) neighborhoods used to score edge (u, i)."""
    if not 0 <= u < graph.n_users:
        throw(f"user {u} outside 0..{graph.n_users - 1}")
    if not 0 <= i < graph.n_items:
        throw(f"item {i} outside 0..{graph.n_items - 1}")
    user_side = merge_neighborhoods(graph.user_lists[u], target_user_neighbors(R, u, i, graph.cap), graph.cap)
    item_side = merge_neighborhoods(graph.item_lists[i], target_item_neighbors(R, u, i, graph.cap), graph.cap)
    return user_side, item_side


def dump_graph(lists: list[NeighborList], path: str) -> str:
    """One line per node: ``node_id: (neighbor,weight) ...`` with 6 significant digits."""
    with open(path, "w", encoding="utf-8") as handle:
        for node, nl in enumerate(lists):
            pairs = " ".join(f"({y},{w:.6g})" for y, w in nl.entries)
            handle.write(f"{node}: {pairs}\n".replace(": \n", ":\n"))
    return path

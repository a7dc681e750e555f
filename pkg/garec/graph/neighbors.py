# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from garec.data import SparseRatings
from garec.utils import throw

DEFAULT_CAP = 50


@dataclass(frozen=True, eq=False)
class NeighborList:
    """Weighted neighbors sorted by descending weight, ties by ascending id."""

    ids: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self):
        return iter(self.entries)

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.ids.tolist(), self.weights.tolist(), strict=True))

    @classmethod
    def empty(cls) -> NeighborList:
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))

    @classmethod
    def from_pairs(cls, pairs, cap: int | None = None) -> NeighborList:
        pairs = list(pairs)
        if not pairs:
            return cls.empty()
        ids = np.array([p[0] for p in pairs], dtype=np.int64)
        weights = np.array([p[1] for p in pairs], dtype=np.float64)
        return top_weighted(ids, weights, cap)


def top_weighted(ids: np.ndarray, weights: np.ndarray, cap: int | None) -> NeighborList:
    """Sort by (-weight, id) and keep the first ``cap`` entries (all when cap is None)."""
    ids = np.asarray(ids, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    order = np.lexsort((ids, -weights))
    if cap is not None:
        order = order[:cap]
    return NeighborList(ids[order], weights[order])


def target_user_neighbors(R: SparseRatings, u: int, i: int, cap: int = DEFAULT_CAP) -> NeighborList:
    """Users y != u who rated item i in R, weighted by r_yi, capped to the top ``cap``."""
    if not 0 <= i < R.n_items:
        throw(f"item {i} outside 0..{R.n_items - 1}")
    users, ratings = R.item_row(i)
    keep = users != u
    return top_weighted(users[keep], ratings[keep], cap)


def target_item_neighbors(R: SparseRatings, u: int, i: int, cap: int = DEFAULT_CAP) -> NeighborList:
    """Items j != i rated by user u in R, weighted by r_uj, capped to the top ``cap``."""
    if not 0 <= u < R.n_users:
        throw(f"user {u} outside 0..{R.n_users - 1}")
    items, ratings = R.user_row(u)
    keep = items != i
    return top_weighted(items[keep], ratings[keep], cap)


def merge_neighborhoods(corating: NeighborList, target: NeighborList, cap: int = DEFAULT_CAP) -> NeighborList:
    """Union of two neighbor lists, each first divided by its own maximum weight.

    A neighbor present in both lists gets the sum of its two normalized weights, so merged
    weights lie in (0, 2].
    """
    parts = [nl for nl in (corating, target) if len(nl)]
    if not parts:
        return NeighborList.empty()
    ids = np.concatenate([nl.ids for nl in parts])
    weights = np.concatenate([nl.weights / nl.weights.max() for nl in parts])
    unique_ids, inverse = np.unique(ids, return_inverse=True)
    summed = np.bincount(inverse, weights=weights, minlength=len(unique_ids))
    return top_weighted(unique_ids, summed, cap)

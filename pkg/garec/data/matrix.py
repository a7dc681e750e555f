# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from garec.utils import throw

from .ratings import RatingDataset


@dataclass(frozen=True, eq=False)
class SparseRatings:
    """The observed rating matrix in two CSR views.

    ``by_user`` is n x m (row u lists the items u rated), ``by_item`` is m x n. Column ids
    within every row are strictly ascending and both views hold the same triples.
    """

    by_user: sparse.csr_matrix
    by_item: sparse.csr_matrix

    @property
    def n_users(self) -> int:
        return self.by_user.shape[0]

    @property
    def n_items(self) -> int:
        return self.by_user.shape[1]

    @property
    def nnz(self) -> int:
        return self.by_user.nnz

    def user_row(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        """(item ids, ratings) of user u, items ascending."""
        start, end = self.by_user.indptr[u], self.by_user.indptr[u + 1]
        return self.by_user.indices[start:end], self.by_user.data[start:end]

    def item_row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """(user ids, ratings) of item i, users ascending."""
        start, end = self.by_item.indptr[i], self.by_item.indptr[i + 1]
        return self.by_item.indices[start:end], self.by_item.data[start:end]

    def transpose(self) -> SparseRatings:
        """Swap the roles of users and items."""
        return SparseRatings(self.by_item, self.by_user)

    def triples(self) -> set[tuple[int, int, float]]:
        coo = self.by_user.tocoo()
        return set(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist(), strict=True))

    def item_triples(self) -> set[tuple[int, int, float]]:
        """Triples enumerated from the by-item view, reported as (user, item, rating)."""
        coo = self.by_item.tocoo()
        return set(zip(coo.col.tolist(), coo.row.tolist(), coo.data.tolist(), strict=True))

    def mean_rating(self) -> float:
        return float(self.by_user.data.mean()) if self.nnz else 0.0

    def to_dense(self) -> np.ndarray:
        return self.by_user.toarray()


def _canonical(matrix: sparse.spmatrix) -> sparse.csr_matrix:
    csr = sparse.csr_matrix(matrix, dtype=np.float64)
    csr.sort_indices()
    return csr


def from_arrays(users, items, ratings, n_users: int, n_items: int) -> SparseRatings:
    users = np.asarray(users, dtype=np.int64)
    items = np.asarray(items, dtype=np.int64)
    values = np.asarray(ratings, dtype=np.float64)
    out_of_range = len(users) and (
        users.min() < 0 or users.max() >= n_users or items.min() < 0 or items.max() >= n_items
    )
    if out_of_range:
        throw("Rating coordinates outside the matrix shape")
    coo = sparse.coo_matrix((values, (users, items)), shape=(n_users, n_items))
    by_user = _canonical(coo)
    if by_user.nnz != len(values):
        throw("Duplicate (user, item) coordinates")
    return SparseRatings(by_user, _canonical(by_user.T))


def build_matrix(dataset: RatingDataset) -> SparseRatings:
    """Both CSR views of the dataset's ratings; nonzero count equals the record count."""
    return from_arrays(dataset.users, dataset.items, dataset.ratings, dataset.n_users, dataset.n_items)


def from_dense(dense) -> SparseRatings:
    """Matrix from a dense array where 0 marks an unobserved entry."""
    dense = np.asarray(dense, dtype=np.float64)
    users, items = np.nonzero(dense)
    return from_arrays(users, items, dense[users, items], dense.shape[0], dense.shape[1])

"""
Seeded builders for small random instances, shared by the test suites.

Everything here is driven by ``numpy.random.default_rng(seed)`` so a failing hypothesis case
can be replayed from its seed alone.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

ML100K_ENV = "GAREC_ML100K"


def ml100k_path() -> str | None:
    """Path to MovieLens-100K ``u.data`` when the environment provides one."""
    path = os.environ.get(ML100K_ENV)
    return path if path and os.path.exists(path) else None


def random_triples(
    rng: np.random.Generator,
    n_users: int,
    n_items: int,
    density: float = 0.5,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct (user, item, rating) triples with ratings in 1..5; never empty."""
    mask = rng.random((n_users, n_items)) < density
    if not mask.any():
        mask[rng.integers(n_users), rng.integers(n_items)] = True
    users, items = np.nonzero(mask)
    ratings = rng.integers(1, 6, size=len(users))
    return users.astype(np.int64), items.astype(np.int64), ratings.astype(np.int64)


def random_matrix(seed: int, n_users: int, n_items: int, density: float = 0.5):
    from garec.data import from_arrays

    users, items, ratings = random_triples(np.random.default_rng(seed), n_users, n_items, density)
    return from_arrays(users, items, ratings.astype(np.float64), n_users, n_items)


def random_dataset(seed: int, n_users: int, n_items: int, density: float = 0.5):
    from garec.data import RatingDataset, RatingRecord

    users, items, ratings = random_triples(np.random.default_rng(seed), n_users, n_items, density)
    records = [RatingRecord(int(u), int(i), int(r)) for u, i, r in zip(users, items, ratings, strict=True)]
    return RatingDataset.from_records(records, n_users, n_items)


def random_state(
    seed: int,
    n_users: int,
    n_items: int,
    d: int,
    d_prime: int,
    activation: str = "tanh",
    separate_key: bool = False,
    hidden: tuple[int, ...] = (3,),
    scale: float = 0.7,
    freeze_factors: bool = False,
):
    """ModelState with dense random parameters (not the near-identity training init)."""
    from garec.attn import AttentionParams, MlpParams, ModelState
    from garec.nmf import FactorPair

    rng = np.random.default_rng([seed, 7])
    factors = FactorPair(rng.uniform(0.1, 1.0, (n_users, d)), rng.uniform(0.1, 1.0, (n_items, d)))

    def attention() -> AttentionParams:
        return AttentionParams(
            rng.normal(0.0, scale, (d, d_prime)),
            rng.normal(0.0, scale, (d_prime, d_prime)),
            rng.normal(0.0, scale, (d, d_prime)),
            rng.normal(0.0, scale, (d, d_prime)) if separate_key else None,
        )

    user_attn, item_attn = attention(), attention()
    widths = [2 * d_prime, *hidden, 1]
    layers = [
        (rng.normal(0.0, scale, (a, b)), rng.normal(0.0, 0.1, b))
        for a, b in zip(widths[:-1], widths[1:], strict=True)
    ]
    return ModelState(
        factors,
        user_attn,
        item_attn,
        MlpParams(layers),
        activation=activation,
        freeze_factors=freeze_factors,
        seed=seed,
    )


@dataclass
class TinyInstance:
    R: object
    graph: object
    state: object
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray


def tiny_instance(
    seed: int, max_side: int = 6, max_d: int = 4, cap: int = 50, **state_kwargs
) -> TinyInstance:
    """Random matrix, its co-rating graph, a random state and a batch of observed edges."""
    from garec.graph import build_corating_graph

    rng = np.random.default_rng(seed)
    n_users = int(rng.integers(2, max_side + 1))
    n_items = int(rng.integers(2, max_side + 1))
    d = int(rng.integers(1, max_d + 1))
    d_prime = int(rng.integers(1, max_d + 1))
    R = random_matrix(seed, n_users, n_items, density=0.6)
    graph = build_corating_graph(R, cap)
    state = random_state(seed, n_users, n_items, d, d_prime, **state_kwargs)
    users, items = R.by_user.nonzero()
    ratings = np.asarray(R.by_user[users, items]).ravel()
    return TinyInstance(R, graph, state, users.astype(np.int64), items.astype(np.int64), ratings)

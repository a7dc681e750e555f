"""
Masked non-negative matrix factorization of the observed ratings.

Only observed entries take part: unobserved cells of R are missing, not zero.
Multiplicative updates keep both factors non-negative without any projection:

    F_U <- F_U * [(M*R) F_I] / [(M*(F_U F_I^T)) F_I + eps]
    F_I <- F_I * [(M*R)^T F_U] / [(M*(F_U F_I^T))^T F_U + eps]
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from garec.config import NmfConfig
from garec.data import SparseRatings
from garec.exceptions import CheckpointError, DivergenceError
from garec.utils import logger, throw
from garec.utils.container import read_container, write_container

LOGGER = logger("nmf")

FACTORS_KIND = "factors"


@dataclass(frozen=True, eq=False)
class FactorPair:
    """User factors F_U (n x d) and item factors F_I (m x d); row u is f_u, row i is f_i."""

    user: np.ndarray
    item: np.ndarray

    def __post_init__(self):
        if self.user.ndim != 2 or self.item.ndim != 2 or self.user.shape[1] != self.item.shape[1]:
            throw(f"Factor shapes disagree: {self.user.shape} vs {self.item.shape}")

    @property
    def d(self) -> int:
        return self.user.shape[1]

    @property
    def n_users(self) -> int:
        return self.user.shape[0]

    @property
    def n_items(self) -> int:
        return self.item.shape[0]

    def is_nonnegative(self) -> bool:
        return bool((self.user >= 0).all() and (self.item >= 0).all())

    def copy(self) -> FactorPair:
        return FactorPair(self.user.copy(), self.item.copy())


@dataclass(frozen=True, eq=False)
class NmfResult:
    factors: FactorPair
    rmse_trace: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return max(0, len(self.rmse_trace) - 1)


def _coordinates(R: SparseRatings) -> tuple[np.ndarray, np.ndarray]:
    rows = np.repeat(np.arange(R.n_users), np.diff(R.by_user.indptr))
    return rows, R.by_user.indices


def _observed_predictions(R: SparseRatings, fp: FactorPair, rows=None, cols=None) -> np.ndarray:
    if rows is None:
        rows, cols = _coordinates(R)
    return np.einsum("kd,kd->k", fp.user[rows], fp.item[cols])


def masked_rmse(R: SparseRatings, fp: FactorPair) -> float:
    """sqrt(mean over observed (u, i) of (r_ui - f_u . f_i)^2)."""
    if fp.n_users != R.n_users or fp.n_items != R.n_items:
        throw(f"Factor rows ({fp.n_users}, {fp.n_items}) do not match R ({R.n_users}, {R.n_items})")
    if R.nnz == 0:
        return 0.0
    residual = R.by_user.data - _observed_predictions(R, fp)
    return float(np.sqrt(np.mean(residual**2)))


def initial_factors(R: SparseRatings, cfg: NmfConfig) -> FactorPair:
    """Seeded draw from (0, sqrt(mean_rating / d)], users first, then items."""
    rng = np.random.default_rng(cfg.seed)
    high = float(np.sqrt(R.mean_rating() / cfg.d))
    user = high - rng.uniform(0.0, high, size=(R.n_users, cfg.d))
    item = high - rng.uniform(0.0, high, size=(R.n_items, cfg.d))
    return FactorPair(user, item)


def factorize_with_trace(R: SparseRatings, cfg: NmfConfig, init: FactorPair | None = None) -> NmfResult:
    """Run masked multiplicative updates and keep the per-iteration RMSE trace.

    Args:
        R: Observed ratings (all positive)
        cfg: Dimension, iteration budget, tolerance, division guard and seed
        init: Optional starting factors (defaults to ``initial_factors(R, cfg)``)
    Returns:
        NmfResult with the final factors and RMSE trace (trace[0] is the initial RMSE)
    Raises:
        ValidationError when d > min(n, m) / 2, R is empty or holds a non-positive rating
    """
    if R.nnz == 0:
        throw("Cannot factorize an empty rating matrix")
    if (R.by_user.data <= 0).any():
        throw("NMF needs every observed rating > 0")
    limit = min(R.n_users, R.n_items) / 2
    if cfg.d > limit:
        throw(f"d={cfg.d} exceeds min(n, m)/2 = {limit:g} (n={R.n_users}, m={R.n_items})")

    fp = (init or initial_factors(R, cfg)).copy()
    if fp.d != cfg.d or fp.n_users != R.n_users or fp.n_items != R.n_items:
        throw(f"Initial factors {fp.user.shape}/{fp.item.shape} do not fit R and d={cfg.d}")
    user, item = fp.user, fp.item
    rows, cols = _coordinates(R)
    shape = R.by_user.shape
    indptr, indices = R.by_user.indptr, R.by_user.indices
    eps = cfg.epsilon

    def observed_matrix(values: np.ndarray) -> sparse.csr_matrix:
        return sparse.csr_matrix((values, indices, indptr), shape=shape)

    trace = [masked_rmse(R, FactorPair(user, item))]
    converged = False
    for step in range(cfg.max_iters):
        kept_user, kept_item = user, item
        approx = observed_matrix(np.einsum("kd,kd->k", user[rows], item[cols]))
        user = user * (R.by_user @ item) / (approx @ item + eps)
        approx = observed_matrix(np.einsum("kd,kd->k", user[rows], item[cols]))
        item = item * (R.by_user.T @ user) / (approx.T @ user + eps)

        if not (np.isfinite(user).all() and np.isfinite(item).all()):
            raise DivergenceError(f"NMF produced non-finite factors at iteration {step + 1}")
        if (user < 0).any() or (item < 0).any():
            raise DivergenceError(f"NMF lost non-negativity at iteration {step + 1}")

        current = masked_rmse(R, FactorPair(user, item))
        previous = trace[-1]
        if current > previous:
            # a step that raises the RMSE is discarded
            user, item = kept_user, kept_item
            LOGGER.debug(f"NMF iteration {step + 1} raised masked RMSE to {current:.6g}; stopping")
            converged = True
            break
        trace.append(current)
        LOGGER.debug(f"NMF iteration {step + 1}: masked RMSE {current:.6f}")
        if previous == 0 or (previous - current) / previous < cfg.rel_tol:
            converged = True
            break

    LOGGER.info(
        f"NMF d={cfg.d} finished after {len(trace) - 1} iteration(s): "
        f"masked RMSE {trace[0]:.4f} -> {trace[-1]:.4f}"
    )
    return NmfResult(FactorPair(user, item), trace, converged)


def factorize(R: SparseRatings, cfg: NmfConfig, init: FactorPair | None = None) -> FactorPair:
    return factorize_with_trace(R, cfg, init).factors


def predict_dot(fp: FactorPair, users, items, bounds: tuple[float, float] | None = (1.0, 5.0)) -> np.ndarray:
    """Baseline rule f_u . f_i, clamped to bounds unless bounds is None."""
    users = np.asarray(users, dtype=np.int64)
    items = np.asarray(items, dtype=np.int64)
    predictions = np.einsum("kd,kd->k", fp.user[users], fp.item[items])
    if bounds is not None:
        predictions = np.clip(predictions, *bounds)
    return predictions


def save_factors(
    fp: FactorPair,
    path: str,
    seed: int = 0,
    config: dict | None = None,
    fit_portion: dict | None = None,
) -> str:
    """Write factors plus the NMF settings and the training portion they were fitted on."""
    meta = {"n": fp.n_users, "m": fp.n_items, "d": fp.d, "seed": int(seed)}
    if config is not None:
        meta["config"] = dict(config)
    if fit_portion is not None:
        meta["fit_portion"] = dict(fit_portion)
    write_container(path, FACTORS_KIND, {"user": fp.user, "item": fp.item}, meta)
    LOGGER.info(f"Saved factors (n={fp.n_users}, m={fp.n_items}, d={fp.d}) to {path}")
    return path


def load_factors_with_meta(path: str, expect_d: int | None = None) -> tuple[FactorPair, dict]:
    """Return (factors, header) of a factors file; the header carries seed, config and fit_portion."""
    header, tensors = read_container(path, FACTORS_KIND)
    if expect_d is not None and header["d"] != expect_d:
        raise CheckpointError(
            f"{path}: factors have d={header['d']}, expected d={expect_d}",
            expected=expect_d,
            found=header["d"],
        )
    fp = FactorPair(tensors["user"], tensors["item"])
    if (fp.n_users, fp.n_items, fp.d) != (header["n"], header["m"], header["d"]):
        raise CheckpointError(f"{path}: tensor shapes disagree with header dimensions")
    return fp, header


def load_factors(path: str, expect_d: int | None = None) -> FactorPair:
    return load_factors_with_meta(path, expect_d)[0]

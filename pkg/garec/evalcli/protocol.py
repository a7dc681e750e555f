"""
Evaluation protocol.

This module handles:
- Scoring a trained model on held-out ratings (clamped predictions, cold fallback counts)
- The NMF dot-product baseline on the same ratings
- k-fold cross-validation reporting both methods per fold

Embeddings are computed from the training matrix and graph only; test ratings are read after
prediction, when the (prediction, truth) pairs are scored.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed

from garec.attn import ModelState, build_edge_batch, forward_batch
from garec.config import TrainConfig, config_echo
from garec.data import RatingDataset, SparseRatings, SplitSpec, build_matrix, split
from garec.graph import CoRatingGraph, build_corating_graph
from garec.nmf import FactorPair, factorize, predict_dot
from garec.train import fit
from garec.utils import logger, throw

from .metrics import mae, rmse

LOGGER = logger("evalcli")

EVAL_BATCH = 1024


@dataclass
class EvalResult:
    rmse: float
    mae: float
    n_evaluated: int
    n_cold_fallback: int

    def to_dict(self) -> dict:
        return asdict(self)


def _score(predictions: np.ndarray, truths: np.ndarray, n_cold: int) -> EvalResult:
    if not len(truths):
        LOGGER.warning("No test ratings to evaluate")
        return EvalResult(0.0, 0.0, 0, 0)
    pairs = np.column_stack([predictions, truths])
    return EvalResult(rmse(pairs), mae(pairs), len(truths), int(n_cold))


def _predict_chunk(
    state: ModelState,
    graph: CoRatingGraph,
    R_train: SparseRatings,
    users: np.ndarray,
    items: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    cache = forward_batch(state, build_edge_batch(R_train, graph, users, items))
    return np.clip(cache.raw, *state.rating_bounds), cache.cold_fallback


def evaluate(
    state: ModelState,
    test: RatingDataset,
    graph: CoRatingGraph,
    R_train: SparseRatings,
    n_jobs: int = 1,
    batch_size: int = EVAL_BATCH,
) -> EvalResult:
    """Score every test rating with clamped predictions.

    Test edges are cut into fixed chunks of ``batch_size``; with ``n_jobs > 1`` chunks run on
    worker threads and results are concatenated in chunk order, so the metric does not depend
    on ``n_jobs``.
    """
    users, items = test.users, test.items
    bounds = [(s, min(s + batch_size, len(test))) for s in range(0, len(test), batch_size)]
    if n_jobs > 1 and len(bounds) > 1:
        chunks = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_predict_chunk)(state, graph, R_train, users[s:e], items[s:e]) for s, e in bounds
        )
    else:
        chunks = [_predict_chunk(state, graph, R_train, users[s:e], items[s:e]) for s, e in bounds]
    predictions = np.concatenate([c[0] for c in chunks]) if chunks else np.zeros(0)
    cold = np.concatenate([c[1] for c in chunks]) if chunks else np.zeros(0, dtype=bool)
    result = _score(predictions, test.ratings.astype(np.float64), cold.sum())
    LOGGER.info(
        f"Evaluated {result.n_evaluated} ratings: rmse {result.rmse:.4f}, mae {result.mae:.4f}, "
        f"cold fallback {result.n_cold_fallback}"
    )
    return result


def evaluate_nmf_baseline(fp: FactorPair, test: RatingDataset) -> EvalResult:
    """Baseline rule f_u . f_i clamped to [1, 5]; there is no fallback, so n_cold_fallback is 0."""
    predictions = predict_dot(fp, test.users, test.items)
    result = _score(predictions, test.ratings.astype(np.float64), 0)
    LOGGER.info(f"NMF baseline on {result.n_evaluated} ratings: rmse {result.rmse:.4f}")
    return result


@dataclass
class FoldResult:
    fold: int
    garec: EvalResult
    nmf: EvalResult
    best_epoch: int | None


@dataclass
class CrossValReport:
    folds: list[FoldResult] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @staticmethod
    def _summary(values: list[float]) -> dict:
        # population standard deviation over folds
        return {"per_fold": values, "mean": float(np.mean(values)), "std": float(np.std(values))}

    @property
    def rmse(self) -> dict:
        return self._summary([f.garec.rmse for f in self.folds])

    @property
    def nmf_rmse(self) -> dict:
        return self._summary([f.nmf.rmse for f in self.folds])

    def to_dict(self) -> dict:
        return {
            "n_folds": len(self.folds),
            "rmse": self.rmse,
            "nmf_rmse": self.nmf_rmse,
            "folds": [
                {
                    "fold": f.fold,
                    "best_epoch": f.best_epoch,
                    "garec": f.garec.to_dict(),
                    "nmf": f.nmf.to_dict(),
                }
                for f in self.folds
            ],
            "config_echo": self.config,
        }


def train_and_evaluate(
    train: RatingDataset,
    test: RatingDataset,
    cfg: TrainConfig,
    progress: bool = False,
) -> tuple[EvalResult, EvalResult, int | None]:
    """Fit on ``train``, then score GARec and the NMF baseline on ``test``.

    The model is scored against the matrix and graph of the whole training set (validation slice
    included); the baseline factors are fitted on the same matrix.
    """
    state, report = fit(train, cfg, progress=progress)
    R_train = build_matrix(train)
    graph = build_corating_graph(R_train, cfg.cap, cfg.n_jobs)
    garec = evaluate(state, test, graph, R_train, cfg.n_jobs)
    nmf = evaluate_nmf_baseline(factorize(R_train, cfg.nmf_config()), test)
    return garec, nmf, report.best_epoch


def crossval(
    dataset: RatingDataset, n_folds: int, cfg: TrainConfig, progress: bool = False
) -> CrossValReport:
    if n_folds < 2:
        throw(f"Cross-validation needs n_folds >= 2, got {n_folds}")
    report = CrossValReport(config=config_echo(cfg))
    for fold in range(n_folds):
        train, test = split(dataset, SplitSpec(fold_index=fold, n_folds=n_folds, seed=cfg.seed))
        garec, nmf, best_epoch = train_and_evaluate(train, test, cfg, progress)
        report.folds.append(FoldResult(fold, garec, nmf, best_epoch))
        LOGGER.info(f"Fold {fold + 1}/{n_folds}: GARec rmse {garec.rmse:.4f}, NMF rmse {nmf.rmse:.4f}")
    summary = report.rmse
    LOGGER.info(f"Cross-validation rmse {summary['mean']:.4f} +/- {summary['std']:.4f}")
    return report

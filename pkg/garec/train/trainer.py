"""
End-to-end training loop.

This module handles:
- Carving a seeded validation slice from the training ratings
- NMF factors and co-rating graphs built from the remaining portion
- Shuffled mini-batch epochs with Adam updates
- Early stopping on validation RMSE, restoring the best epoch's parameters
- The per-epoch report, exportable as JSON lines
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from tqdm import tqdm

from garec.attn import ModelState, build_edge_batch, init_state, predict_batch
from garec.config import TrainConfig
from garec.data import RatingDataset, SparseRatings, build_matrix
from garec.graph import CoRatingGraph, build_corating_graph
from garec.nmf import FactorPair, factorize
from garec.utils import logger, throw

from .backward import loss_and_gradients
from .optimizer import AdamState, step

LOGGER = logger("train")


@dataclass
class EpochRecord:
    epoch: int
    train_mse: float
    val_rmse: float | None
    seconds: float


@dataclass
class TrainReport:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int | None = None
    test_rmse: float | None = None

    def add(self, record: EpochRecord) -> None:
        expected = len(self.epochs)
        if record.epoch != expected:
            throw(f"Epoch {record.epoch} recorded out of order, expected {expected}")
        self.epochs.append(record)

    def to_jsonl(self, path: str) -> str:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            for record in self.epochs:
                handle.write(json.dumps(asdict(record)) + "\n")
        return path

    def without_timing(self) -> list[tuple[int, float, float | None]]:
        """Epoch rows minus wall time, for run-to-run comparisons."""
        return [(r.epoch, r.train_mse, r.val_rmse) for r in self.epochs]


def carve_validation(
    train: RatingDataset, fraction: float, seed: int
) -> tuple[RatingDataset, RatingDataset | None]:
    """Split ``train`` into (fit portion, validation slice); the slice is None when fraction is 0."""
    n_val = int(round(fraction * len(train)))
    if n_val == 0:
        return train, None
    if n_val >= len(train):
        throw(f"validation_fraction={fraction} leaves no training records out of {len(train)}")
    order = np.random.default_rng([seed, 2]).permutation(len(train))
    return train.subset(order[n_val:]), train.subset(order[:n_val])


def fit_portion_record(train: RatingDataset, cfg: TrainConfig) -> dict:
    """Header record naming the portion of ``train`` that ``fit`` trains on under ``cfg``."""
    fit_part, _ = carve_validation(train, cfg.validation_fraction, cfg.seed)
    return {
        "validation_fraction": cfg.validation_fraction,
        "seed": cfg.seed,
        "n_ratings": len(fit_part),
        "n_train": len(train),
    }


def validation_rmse(
    state: ModelState,
    dataset: RatingDataset,
    graph: CoRatingGraph,
    R: SparseRatings,
    batch_size: int,
) -> float:
    """RMSE of clamped predictions over ``dataset``, evaluated in batches."""
    squared = []
    for start in range(0, len(dataset), batch_size):
        rows = slice(start, start + batch_size)
        batch = build_edge_batch(R, graph, dataset.users[rows], dataset.items[rows], dataset.ratings[rows])
        squared.append((predict_batch(state, batch) - batch.ratings) ** 2)
    return float(np.sqrt(np.mean(np.concatenate(squared))))


def fit(
    train: RatingDataset,
    cfg: TrainConfig,
    factors: FactorPair | None = None,
    progress: bool = False,
) -> tuple[ModelState, TrainReport]:
    """Train a model on ``train``.

    Args:
        train: Training ratings (dense ids); a validation slice is carved from it
        cfg: Hyperparameters; ``cfg.seed`` fixes every random choice
        factors: Optional precomputed NMF factors for the fit portion
        progress: Show a tqdm bar over epochs
    Returns:
        (state restored to the best validation epoch, per-epoch report)
    Raises:
        ValidationError on empty input, DivergenceError when a loss or gradient stops being finite
    """
    if not len(train):
        throw("Cannot train on an empty dataset")
    fit_part, val_part = carve_validation(train, cfg.validation_fraction, cfg.seed)
    LOGGER.info(
        f"Training on {len(fit_part)} ratings, validating on {len(val_part) if val_part is not None else 0}"
    )
    if val_part is None:
        LOGGER.warning("validation_fraction=0: no early stopping signal, keeping the last epoch")

    R = build_matrix(fit_part)
    graph = build_corating_graph(R, cfg.cap, cfg.n_jobs, progress)
    if factors is None:
        factors = factorize(R, cfg.nmf_config())
    state = init_state(factors, cfg, rating_mean=R.mean_rating())
    opt_state = AdamState()

    rng = np.random.default_rng([cfg.seed, 3])
    users, items, ratings = fit_part.users, fit_part.items, fit_part.ratings
    report = TrainReport()
    best_state, best_rmse, since_best = state, np.inf, 0

    for epoch in tqdm(range(cfg.max_epochs), desc="Epochs", disable=not progress):
        started = time.perf_counter()
        order = rng.permutation(len(fit_part))
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            rows = order[start : start + cfg.batch_size]
            batch = build_edge_batch(R, graph, users[rows], items[rows], ratings[rows])
            loss, grads = loss_and_gradients(batch, state, graph, R, cfg.n_jobs)
            LOGGER.debug(f"epoch {epoch} batch {start // cfg.batch_size}: loss {loss:.6f}")
            total += loss * len(rows)
            state, opt_state = step(state, grads, opt_state, cfg.learning_rate)

        val_rmse = None
        if val_part is not None:
            val_rmse = validation_rmse(state, val_part, graph, R, cfg.batch_size)
        record = EpochRecord(epoch, total / len(order), val_rmse, time.perf_counter() - started)
        report.add(record)
        LOGGER.info(
            f"epoch {epoch}: train_mse {record.train_mse:.4f}"
            + (f", val_rmse {val_rmse:.4f}" if val_rmse is not None else "")
        )

        if val_rmse is None:
            best_state, report.best_epoch = state, epoch
            continue
        if val_rmse < best_rmse:
            best_state, best_rmse, report.best_epoch, since_best = state, val_rmse, epoch, 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                LOGGER.info(
                    f"Early stop after epoch {epoch}; best epoch {report.best_epoch} (val_rmse {best_rmse:.4f})"
                )
                break

    return best_state, report

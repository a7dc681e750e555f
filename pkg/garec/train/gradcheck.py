"""
Central finite-difference check of the analytic gradients.

Every entry of every trainable tensor is nudged by +/- step. Entries whose nudge changes any
piecewise decision of the forward pass (see ``ForwardCache.mask_signature``) sit on a mask
boundary where the derivative is one-sided; they are skipped and counted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from garec.attn import ModelState, forward_batch
from garec.data import SparseRatings
from garec.graph import CoRatingGraph
from garec.utils import logger

from .backward import as_edge_batch, gradients

LOGGER = logger("train")


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst: tuple[str, tuple[int, ...]] | None
    n_checked: int
    n_skipped: int

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_rel_error <= tolerance


def relative_error(analytic: float, numeric: float, floor: float = 1e-4) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def check_gradients(
    batch,
    state: ModelState,
    graph: CoRatingGraph,
    R: SparseRatings,
    step: float = 1e-5,
    floor: float = 1e-4,
) -> GradCheckReport:
    edge_batch = as_edge_batch(batch, graph, R)
    analytic = gradients(edge_batch, state, graph, R)
    base_signature = forward_batch(state, edge_batch).mask_signature()
    tensors = state.tensors()

    def nudged_loss(name: str, value: np.ndarray) -> tuple[float, bytes]:
        cache = forward_batch(state.replace_tensors({name: value}), edge_batch)
        return float(np.mean((cache.raw - edge_batch.ratings) ** 2)), cache.mask_signature()

    worst, max_error, checked, skipped = None, 0.0, 0, 0
    for name in state.trainable_names():
        param = tensors[name]
        for index in np.ndindex(param.shape):
            plus = param.copy()
            plus[index] += step
            minus = param.copy()
            minus[index] -= step
            loss_plus, sig_plus = nudged_loss(name, plus)
            loss_minus, sig_minus = nudged_loss(name, minus)
            if sig_plus != base_signature or sig_minus != base_signature:
                skipped += 1
                continue
            numeric = (loss_plus - loss_minus) / (2.0 * step)
            error = relative_error(float(analytic[name][index]), numeric, floor)
            checked += 1
            if error > max_error:
                max_error, worst = error, (name, index)

    LOGGER.debug(
        f"Gradient check: {checked} entries, {skipped} on mask boundaries, max rel error {max_error:.3e}"
    )
    return GradCheckReport(max_error, worst, checked, skipped)

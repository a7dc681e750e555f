# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from .metrics import RATING_BOUNDS, mae, rmse
from .protocol import (
    CrossValReport,
    EvalResult,
    FoldResult,
    crossval,
    evaluate,
    evaluate_nmf_baseline,
    train_and_evaluate,
)

__all__ = [
    "RATING_BOUNDS",
    "CrossValReport",
    "EvalResult",
    "FoldResult",
    "crossval",
    "evaluate",
    "evaluate_nmf_baseline",
    "mae",
    "rmse",
    "train_and_evaluate",
]

# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from .factorize import (
    FactorPair,
    NmfResult,
    factorize,
    factorize_with_trace,
    initial_factors,
    load_factors,
    load_factors_with_meta,
    masked_rmse,
    predict_dot,
    save_factors,
)

__all__ = [
    "FactorPair",
    "NmfResult",
    "factorize",
    "factorize_with_trace",
    "initial_factors",
    "load_factors",
    "load_factors_with_meta",
    "masked_rmse",
    "predict_dot",
    "save_factors",
]

# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from .matrix import SparseRatings, build_matrix, from_arrays, from_dense
from .ratings import (
    IdMap,
    PreparedData,
    RatingDataset,
    RatingFormat,
    RatingRecord,
    SplitSpec,
    dataset_stats,
    export_csv,
    load_csv,
    load_prepared,
    parse_ratings,
    save_prepared,
    split,
)

__all__ = [
    "IdMap",
    "PreparedData",
    "RatingDataset",
    "RatingFormat",
    "RatingRecord",
    "SparseRatings",
    "SplitSpec",
    "build_matrix",
    "dataset_stats",
    "export_csv",
    "from_arrays",
    "from_dense",
    "load_csv",
    "load_prepared",
    "parse_ratings",
    "save_prepared",
    "split",
]

"""
Rating logs: parsing, dense re-indexing and train/test partitioning.

This module handles:
- MovieLens-100K (tab separated) and MovieLens-1M (``::`` separated) logs
- Dense id maps for users and items
- Record-level random splits and k-fold slices
- The canonical headerless ``user,item,rating`` CSV and prepared-data directories
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np
import pandas as pd

from garec.exceptions import DataFormatError, ValidationError
from garec.utils import logger, require_in_range, throw

LOGGER = logger("data")

COLUMNS = ["user_id", "item_id", "rating", "timestamp"]
RATING_VALUES = (1, 2, 3, 4, 5)


class RatingFormat(str, Enum):
    TAB100K = "tab100k"
    SEP1M = "sep1m"

    @property
    def delimiter(self) -> str:
        return "\t" if self is RatingFormat.TAB100K else "::"


@dataclass(frozen=True)
class RatingRecord:
    user_id: int
    item_id: int
    rating: int
    timestamp: int = 0


@dataclass(frozen=True, eq=False)
class IdMap:
    """Bijection between raw ids (ascending) and dense indices ``0..len-1``."""

    raw_ids: np.ndarray

    def __len__(self) -> int:
        return len(self.raw_ids)

    def to_index(self, raw) -> int:
        pos = int(np.searchsorted(self.raw_ids, raw))
        if pos >= len(self.raw_ids) or self.raw_ids[pos] != raw:
            throw(f"Unknown raw id {raw!r}")
        return pos

    def to_raw(self, index: int):
        if not 0 <= index < len(self.raw_ids):
            throw(f"Dense index {index} outside 0..{len(self.raw_ids) - 1}")
        return self.raw_ids[index].item()

    @classmethod
    def identity(cls, size: int) -> IdMap:
        return cls(np.arange(size, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class RatingDataset:
    """Ratings with dense ids. ``frame`` has the columns of COLUMNS, int64."""

    frame: pd.DataFrame
    n_users: int
    n_items: int
    user_map: IdMap
    item_map: IdMap

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def users(self) -> np.ndarray:
        return self.frame["user_id"].to_numpy()

    @property
    def items(self) -> np.ndarray:
        return self.frame["item_id"].to_numpy()

    @property
    def ratings(self) -> np.ndarray:
        return self.frame["rating"].to_numpy()

    @property
    def records(self) -> list[RatingRecord]:
        return [
            RatingRecord(int(u), int(i), int(r), int(t))
            for u, i, r, t in self.frame[COLUMNS].itertuples(index=False, name=None)
        ]

    def subset(self, indices) -> RatingDataset:
        """Dataset restricted to the given record positions, in ascending position order."""
        rows = np.sort(np.asarray(indices, dtype=np.int64))
        frame = self.frame.iloc[rows].reset_index(drop=True)
        return RatingDataset(frame, self.n_users, self.n_items, self.user_map, self.item_map)

    @classmethod
    def from_records(
        cls,
        records,
        n_users: int | None = None,
        n_items: int | None = None,
    ) -> RatingDataset:
        """Build a dataset from records already carrying dense ids (identity id maps)."""
        rows = [(r.user_id, r.item_id, r.rating, r.timestamp) for r in records]
        frame = pd.DataFrame(rows, columns=COLUMNS, dtype=np.int64)
        if frame.empty:
            frame = pd.DataFrame({c: pd.Series(dtype=np.int64) for c in COLUMNS})
        n_users = n_users if n_users is not None else int(frame["user_id"].max() + 1 if len(frame) else 0)
        n_items = n_items if n_items is not None else int(frame["item_id"].max() + 1 if len(frame) else 0)
        _validate_frame(frame, n_users, n_items)
        return cls(frame, n_users, n_items, IdMap.identity(n_users), IdMap.identity(n_items))


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    fold_index: int = 0
    n_folds: int = 1
    seed: int = 0

    def __post_init__(self):
        require_in_range("train_fraction", self.train_fraction, 0.0, 1.0, False, False)
        if self.n_folds < 1:
            throw(f"n_folds must be >= 1, got {self.n_folds}")
        if not 0 <= self.fold_index < self.n_folds:
            throw(f"fold_index must lie in [0, {self.n_folds}), got {self.fold_index}")

    @property
    def is_fold(self) -> bool:
        return self.n_folds > 1


def _validate_frame(frame: pd.DataFrame, n_users: int, n_items: int) -> None:
    if len(frame) == 0:
        return
    if frame["user_id"].min() < 0 or frame["user_id"].max() >= n_users:
        throw(f"user_id outside 0..{n_users - 1}")
    if frame["item_id"].min() < 0 or frame["item_id"].max() >= n_items:
        throw(f"item_id outside 0..{n_items - 1}")
    if not frame["rating"].isin(RATING_VALUES).all():
        throw("rating outside {1..5}")
    if frame.duplicated(["user_id", "item_id"]).any():
        throw("duplicate (user, item) pair")


def parse_ratings(path: str, format: str | RatingFormat) -> RatingDataset:
    """Parse a MovieLens rating log and re-index users and items densely.

    Args:
        path: Location of ``u.data`` (tab100k) or ``ratings.dat`` (sep1m)
        format: ``tab100k`` or ``sep1m``
    Returns:
        RatingDataset with one record per non-blank line
    Raises:
        DataFormatError for malformed lines, ratings outside {1..5}, duplicate pairs
        or an empty file
    """
    try:
        fmt = RatingFormat(format)
    except ValueError:
        throw(f"Unknown rating format {format!r}; expected tab100k or sep1m")
    if not os.path.exists(path):
        throw(f"Rating file not found: {path}")

    with open(path, encoding="latin-1") as handle:
        lines = handle.read().splitlines()
    series = pd.Series(lines, index=pd.RangeIndex(1, len(lines) + 1), dtype=object).str.strip()
    series = series[series != ""]
    if series.empty:
        raise DataFormatError(f"no records in {path}")

    delim = fmt.delimiter
    field_counts = series.str.count(re.escape(delim)) + 1
    bad = field_counts != 4
    if bad.any():
        line_no = int(bad.idxmax())
        raise DataFormatError(f"expected 4 fields separated by {delim!r}", path, line_no)

    parts = series.str.split(delim, regex=False, expand=True)
    parts.columns = COLUMNS
    numeric = parts.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    not_integral = numeric.isna().any(axis=1) | (numeric.fillna(0) % 1 != 0).any(axis=1)
    if not_integral.any():
        line_no = int(not_integral.idxmax())
        raise DataFormatError("fields must be integers", path, line_no)
    numeric = numeric.astype(np.int64)

    out_of_range = ~numeric["rating"].isin(RATING_VALUES)
    if out_of_range.any():
        line_no = int(out_of_range.idxmax())
        value = numeric.loc[line_no, "rating"]
        raise DataFormatError(f"rating {value} outside {{1..5}}", path, line_no)
    if (numeric["timestamp"] < 0).any():
        line_no = int((numeric["timestamp"] < 0).idxmax())
        raise DataFormatError("negative timestamp", path, line_no)

    duplicated = numeric.duplicated(["user_id", "item_id"], keep="first")
    if duplicated.any():
        line_no = int(duplicated.idxmax())
        raise DataFormatError("duplicate (user, item) pair", path, line_no)

    user_codes, user_raw = pd.factorize(numeric["user_id"], sort=True)
    item_codes, item_raw = pd.factorize(numeric["item_id"], sort=True)
    frame = pd.DataFrame(
        {
            "user_id": user_codes.astype(np.int64),
            "item_id": item_codes.astype(np.int64),
            "rating": numeric["rating"].to_numpy(),
            "timestamp": numeric["timestamp"].to_numpy(),
        }
    )
    dataset = RatingDataset(
        frame,
        len(user_raw),
        len(item_raw),
        IdMap(np.asarray(user_raw, dtype=np.int64)),
        IdMap(np.asarray(item_raw, dtype=np.int64)),
    )
    LOGGER.info(
        f"Parsed {len(dataset)} ratings from {path} ({dataset.n_users} users, {dataset.n_items} items)"
    )
    return dataset


def split(dataset: RatingDataset, spec: SplitSpec) -> tuple[RatingDataset, RatingDataset]:
    """Partition records into (train, test), deterministically for a given SplitSpec.

    Plain splits hold out ``round((1 - train_fraction) * N)`` records; fold splits hold out
    the ``fold_index``-th of ``n_folds`` near-equal slices of one seeded permutation.
    """
    if len(dataset) == 0:
        throw("Cannot split an empty dataset")
    n = len(dataset)
    order = np.random.default_rng(spec.seed).permutation(n)
    if spec.is_fold:
        test_rows = np.array_split(order, spec.n_folds)[spec.fold_index]
    else:
        n_test = int(round((1.0 - spec.train_fraction) * n))
        test_rows = order[:n_test]
    mask = np.zeros(n, dtype=bool)
    mask[test_rows] = True
    train = dataset.subset(np.flatnonzero(~mask))
    test = dataset.subset(np.flatnonzero(mask))
    LOGGER.info(f"Split {n} ratings into train={len(train)} test={len(test)} ({spec})")
    return train, test


def dataset_stats(dataset: RatingDataset) -> dict[str, float]:
    nnz = len(dataset)
    cells = dataset.n_users * dataset.n_items
    return {
        "n_users": dataset.n_users,
        "n_items": dataset.n_items,
        "n_ratings": nnz,
        "density": nnz / cells if cells else 0.0,
        "mean_rating": float(dataset.ratings.mean()) if nnz else 0.0,
    }


def export_csv(dataset: RatingDataset, path: str) -> None:
    """Write the canonical headerless ``user,item,rating`` CSV with dense ids."""
    dataset.frame[["user_id", "item_id", "rating"]].to_csv(path, header=False, index=False)


def load_csv(
    path: str,
    n_users: int,
    n_items: int,
    user_map: IdMap | None = None,
    item_map: IdMap | None = None,
) -> RatingDataset:
    """Read a canonical CSV written by ``export_csv``."""
    if not os.path.exists(path):
        throw(f"Rating CSV not found: {path}")
    try:
        frame = pd.read_csv(path, header=None, names=["user_id", "item_id", "rating"], dtype=np.int64)
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame({c: pd.Series(dtype=np.int64) for c in COLUMNS[:3]})
    except ValueError as e:
        raise DataFormatError(f"{path}: {e}")
    frame["timestamp"] = np.int64(0)
    _validate_frame(frame, n_users, n_items)
    return RatingDataset(
        frame[COLUMNS],
        n_users,
        n_items,
        user_map or IdMap.identity(n_users),
        item_map or IdMap.identity(n_items),
    )


@dataclass(frozen=True, eq=False)
class PreparedData:
    train: RatingDataset
    test: RatingDataset
    meta: dict


def save_prepared(out_dir: str, train: RatingDataset, test: RatingDataset, meta: dict) -> str:
    """Write ``train.csv``, ``test.csv``, ``users.csv``, ``items.csv`` and ``meta.json`` under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    export_csv(train, os.path.join(out_dir, "train.csv"))
    export_csv(test, os.path.join(out_dir, "test.csv"))
    for name, id_map in (("users.csv", train.user_map), ("items.csv", train.item_map)):
        pd.DataFrame({"index": np.arange(len(id_map)), "raw_id": id_map.raw_ids}).to_csv(
            os.path.join(out_dir, name), header=False, index=False
        )
    meta = {
        **meta,
        "n_users": train.n_users,
        "n_items": train.n_items,
        "n_train": len(train),
        "n_test": len(test),
    }
    with open(os.path.join(out_dir, "meta.json"), "w", encoding="utf-8") as handle:
        json.dump(meta, handle, indent=2, sort_keys=True)
    LOGGER.info(f"Wrote prepared data to {out_dir} (train={len(train)}, test={len(test)})")
    return out_dir


def _read_id_map(path: str) -> IdMap | None:
    if not os.path.exists(path):
        return None
    frame = pd.read_csv(path, header=None, names=["index", "raw_id"], dtype=np.int64)
    return IdMap(frame.sort_values("index")["raw_id"].to_numpy())


def load_prepared(data_dir: str) -> PreparedData:
    meta_path = os.path.join(data_dir, "meta.json")
    if not os.path.exists(meta_path):
        raise ValidationError(f"Not a prepared data directory (meta.json missing): {data_dir}")
    with open(meta_path, encoding="utf-8") as handle:
        meta = json.load(handle)
    n_users, n_items = int(meta["n_users"]), int(meta["n_items"])
    user_map = _read_id_map(os.path.join(data_dir, "users.csv"))
    item_map = _read_id_map(os.path.join(data_dir, "items.csv"))
    train = load_csv(os.path.join(data_dir, "train.csv"), n_users, n_items, user_map, item_map)
    test = load_csv(os.path.join(data_dir, "test.csv"), n_users, n_items, user_map, item_map)
    return PreparedData(train, test, meta)

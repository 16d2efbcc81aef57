"""Dataset construction from sweep outputs.

Consumes the simulator's external interfaces only: the aggregate
``results.csv`` (one row per experiment) or a directory of per-experiment
``.jsonl.gz`` archives. Each dataset row maps the five router/network
features to the four buffer-sharing outcome targets.
"""

from __future__ import annotations

import csv
import glob
import gzip
import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

SCHEMA_VERSION = 1

FEATURES = ["ecn_threshold", "red_min", "red_max", "cubic_rtt", "line_rate"]
TARGETS = ["cubic_share", "total_drops", "avg_buffer", "max_buffer"]
TARGETS_NO_DROPS = ["cubic_share", "avg_buffer", "max_buffer"]


class SchemaMismatchError(RuntimeError):
    pass


@dataclass(frozen=True)
class DatasetRow:
    """One experiment: feature record, target record, and the buffer
    capacity (used only to clamp buffer predictions)."""

    features: tuple  # values in FEATURES order
    targets: tuple  # values in TARGETS order
    capacity: Optional[float] = None

    def feature_dict(self) -> dict:
        return dict(zip(FEATURES, self.features))

    def target_dict(self) -> dict:
        return dict(zip(TARGETS, self.targets))


def target_names(include_drops: bool) -> list[str]:
    return list(TARGETS) if include_drops else list(TARGETS_NO_DROPS)


def build_dataset(path: str, include_drops: bool = True) -> list[DatasetRow]:
    """Rows from a results CSV, a sweep directory, or archive files.

    Rows are deduplicated on the feature tuple; the same features with
    different targets means the source runs were not deterministic and is
    an error. With ``include_drops`` the packet-drops target column must be
    present in the source; without it, sources lacking that column load
    fine and the drops slot is carried as NaN (never selected downstream).
    """
    raw = _load_records(path)
    if include_drops and any("total_drops" not in rec for rec in raw):
        raise ValueError(f"{path} lacks the total_drops target column")
    by_features: dict[tuple, DatasetRow] = {}
    for rec in raw:
        _check_schema(rec, path)
        feats = tuple(float(rec[k]) for k in FEATURES)
        targets = tuple(
            float(rec[k]) if k in rec else float("nan") for k in TARGETS
        )
        row = DatasetRow(feats, targets, capacity=_maybe_float(rec.get("capacity")))
        seen = by_features.get(feats)
        if seen is None:
            by_features[feats] = row
        elif not _targets_equal(seen.targets, targets):
            raise ValueError(
                f"duplicate feature tuple {feats} with differing targets "
                "(nondeterminism signal in the source runs)"
            )
    return [by_features[k] for k in sorted(by_features)]


def _targets_equal(a: tuple, b: tuple) -> bool:
    return all(x == y or (x != x and y != y) for x, y in zip(a, b))


def _maybe_float(value) -> Optional[float]:
    if value in (None, ""):
        return None
    return float(value)


def _check_schema(rec: dict, path: str) -> None:
    version = rec.get("schema_version")
    if version is None:
        return
    if int(float(version)) != SCHEMA_VERSION:
        raise SchemaMismatchError(
            f"{path}: rows carry schema_version {version}, "
            f"this tool supports {SCHEMA_VERSION}"
        )


def _load_records(path: str) -> list[dict]:
    if os.path.isfile(path):
        if path.endswith(".gz"):
            return [_archive_record(path)]
        return _csv_records(path)
    results = os.path.join(path, "results.csv")
    if os.path.exists(results):
        return _csv_records(results)
    archives = sorted(glob.glob(os.path.join(path, "*.jsonl.gz")))
    if not archives:
        raise FileNotFoundError(f"no results.csv or archives under {path}")
    return [_archive_record(a) for a in archives]


def _csv_records(path: str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        records = list(csv.DictReader(fh))
    if not records:
        raise ValueError(f"{path} holds no rows")
    missing = [k for k in FEATURES + TARGETS_NO_DROPS if k not in records[0]]
    if missing:
        raise ValueError(f"{path} lacks required columns: {missing}")
    if "total_drops" not in records[0]:
        for rec in records:
            rec.pop("total_drops", None)
    return records


def _archive_record(path: str) -> dict:
    with gzip.open(path, "rt", encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    config = next((l for l in lines if l.get("section") == "config"), None)
    summary = next((l for l in lines if l.get("section") == "summary"), None)
    if config is None or summary is None:
        raise ValueError(f"{path}: not an experiment archive")
    rec = {
        "schema_version": config.get("schema_version"),
        "ecn_threshold": config["buffer"]["ecn_threshold"],
        "red_min": config["buffer"]["red_min"],
        "red_max": config["buffer"]["red_max"],
        "capacity": config["buffer"]["capacity"],
        "cubic_rtt": config["conditions"]["cubic_rtt"],
        "line_rate": config["conditions"]["line_rate"],
    }
    rec.update({k: summary[k] for k in TARGETS})
    return rec


def write_dataset_csv(rows: list[DatasetRow], path: str,
                      include_drops: bool = True) -> None:
    """The canonical dataset CSV: feature columns then target columns."""
    names = target_names(include_drops)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FEATURES + names + ["capacity", "schema_version"])
        for row in rows:
            targets = row.target_dict()
            writer.writerow(
                list(row.features)
                + [targets[k] for k in names]
                + [row.capacity if row.capacity is not None else "", SCHEMA_VERSION]
            )


def split(rows: list[DatasetRow], train_fraction: float,
          seed: int) -> tuple[list[DatasetRow], list[DatasetRow]]:
    """Uniform random split without replacement, reproducible under seed."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    n = len(rows)
    n_train = int(round(train_fraction * n))
    if n_train == 0:
        raise ValueError(f"train_fraction {train_fraction} yields zero training rows")
    if n_train >= n:
        raise ValueError("split leaves no test rows")
    order = np.random.default_rng(seed).permutation(n)
    train = [rows[i] for i in sorted(order[:n_train])]
    test = [rows[i] for i in sorted(order[n_train:])]
    return train, test


def matrices(rows: list[DatasetRow], include_drops: bool = True):
    """(X, Y) numpy matrices in FEATURES x selected-target order."""
    names = target_names(include_drops)
    idx = [TARGETS.index(k) for k in names]
    x = np.array([row.features for row in rows], dtype=float)
    y = np.array([[row.targets[i] for i in idx] for row in rows], dtype=float)
    if np.isnan(y).any():
        raise ValueError("dataset lacks values for a selected target column")
    return x, y

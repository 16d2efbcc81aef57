"""Aggregate tables for heatmap-style analysis of sweep results.

Produces long-format CSV (one row per (x, y) cell, averaged over matching
experiments) from either a sweep output directory or a results.csv file.
"""

from __future__ import annotations

import csv
import glob
import os
from collections import defaultdict

from .archive import read_archive
from .config import FLAT_CONFIG_FIELDS, SUMMARY_FIELDS
from .sweep import RESULTS_CSV

#: Dimensions usable on the x/y axes and in filters.
DIMENSIONS = set(FLAT_CONFIG_FIELDS)
#: Convenience alias: a drop-tail grid varies red_min == red_max together.
DIMENSION_ALIASES = {"drop_threshold": "red_max"}
#: Metrics usable on the z axis.
METRICS = {f for f in SUMMARY_FIELDS if f not in ("zero_goodput",)}

_NUMERIC = {f: float for f in SUMMARY_FIELDS if f != "zero_goodput"}


def resolve_dimension(name: str) -> str:
    name = DIMENSION_ALIASES.get(name, name)
    if name not in DIMENSIONS:
        raise ValueError(f"unknown dimension {name!r}")
    return name


def resolve_metric(name: str) -> str:
    if name not in METRICS:
        raise ValueError(f"unknown metric {name!r}")
    return name


def load_rows(path: str) -> list[dict]:
    """Experiment rows from a results.csv, a sweep directory, or archives."""
    if os.path.isfile(path):
        return _rows_from_csv(path)
    csv_path = os.path.join(path, RESULTS_CSV)
    if os.path.exists(csv_path):
        return _rows_from_csv(csv_path)
    archives = sorted(glob.glob(os.path.join(path, "*.jsonl.gz")))
    if not archives:
        raise FileNotFoundError(f"no results.csv or archives under {path}")
    rows = []
    for arch in archives:
        doc = read_archive(arch)
        row: dict = {}
        for key in FLAT_CONFIG_FIELDS:
            if key in ("ecn_threshold", "red_min", "red_max", "capacity",
                       "max_drop_prob", "avg_weight"):
                row[key] = doc["config"]["buffer"][key]
            elif key in ("cubic_rtt", "dctcp_rtt", "line_rate", "receiver_link_delay"):
                row[key] = doc["config"]["conditions"][key]
            else:
                row[key] = doc["config"].get(key)
        for key in SUMMARY_FIELDS:
            row[key] = doc["summary"][key]
        rows.append(row)
    return rows


def _rows_from_csv(path: str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        raw = list(csv.DictReader(fh))
    if not raw:
        raise ValueError(f"{path} holds no experiment rows")
    rows = []
    for rec in raw:
        row = dict(rec)
        for key in FLAT_CONFIG_FIELDS:
            if key in row and row[key] not in ("", "None"):
                row[key] = float(row[key]) if "." in str(row[key]) else int(float(row[key]))
        for key, cast in _NUMERIC.items():
            if key in row:
                row[key] = cast(row[key])
        rows.append(row)
    return rows


def emit_heatmap_table(
    rows: list[dict],
    x: str,
    y: str,
    z: str,
    filters: dict[str, float] | None = None,
) -> list[dict]:
    """Average metric ``z`` into (x, y) cells; returns long-format records."""
    x = resolve_dimension(x)
    y = resolve_dimension(y)
    z = resolve_metric(z)
    cells: dict[tuple, list[float]] = defaultdict(list)
    for row in rows:
        if filters and any(float(row[k]) != v for k, v in filters.items()):
            continue
        cells[(row[x], row[y])].append(float(row[z]))
    if not cells:
        raise ValueError("no experiments match the requested filters")
    table = [
        {x: key[0], y: key[1], z: sum(vals) / len(vals)}
        for key, vals in sorted(cells.items())
    ]
    return table


def write_table_csv(table: list[dict], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(table[0].keys()))
        writer.writeheader()
        writer.writerows(table)

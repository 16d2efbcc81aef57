"""Shared builders for synthetic results files."""

import csv

from modelkit.dataset import FEATURES, TARGETS


def write_results_csv(path, rows, extra_cols=()):
    fields = FEATURES + TARGETS + ["capacity", "schema_version", *extra_cols]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def results_row(i, **kw):
    # Feature tuples are distinct per index (the ECN value encodes i).
    row = {
        "ecn_threshold": 10_000 + 5_000 * i,
        "red_min": 100_000,
        "red_max": 300_000 + 100_000 * (i % 3),
        "cubic_rtt": 25_000_000,
        "line_rate": 10**9,
        "cubic_share": round(0.1 * (i % 10) + 0.003 * i, 6),
        "total_drops": 100 * i,
        "avg_buffer": 50_000.0 + 1000 * i,
        "max_buffer": 900_000,
        "capacity": 1_800_000,
        "schema_version": 1,
    }
    row.update(kw)
    return row

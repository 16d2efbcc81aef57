"""Parallel sweep execution: one archive per experiment, a manifest, and an
aggregate results.csv (one row per experiment) for downstream analysis.

Experiments share nothing but the read-only config list, so worker count
never changes any archive's bytes. Completed archives are skipped on rerun,
making interrupted sweeps resumable.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import multiprocessing
import os
import time
import traceback
from dataclasses import dataclass
from typing import Optional

from .archive import archive_name, read_archive, write_archive
from .config import FLAT_CONFIG_FIELDS, SUMMARY_FIELDS, ExperimentConfig
from .experiment import run_experiment

RESULTS_CSV = "results.csv"
MANIFEST_JSON = "manifest.json"


@dataclass
class RunRecord:
    index: int
    archive: str
    status: str  # "ok" | "cached" | "failed"
    wall_clock: float
    error: Optional[str] = None
    row: Optional[dict] = None


def _execute_one(args: tuple[int, dict, str]) -> RunRecord:
    index, config_doc, out_dir = args
    config = ExperimentConfig.from_dict(config_doc)
    name = archive_name(config)
    path = os.path.join(out_dir, name)
    started = time.perf_counter()
    try:
        result = run_experiment(config)
        write_archive(path, config, result.summary, result.snapshots)
        row = {**config.flat(), **_summary_row(dataclasses.asdict(result.summary))}
        return RunRecord(index, name, "ok", time.perf_counter() - started, row=row)
    except Exception:
        return RunRecord(
            index, name, "failed", time.perf_counter() - started,
            error=traceback.format_exc(limit=8),
        )


def _summary_row(summary_doc: dict) -> dict:
    return {k: summary_doc[k] for k in SUMMARY_FIELDS}


def run_sweep(
    configs: list[ExperimentConfig],
    out_dir: str,
    workers: int = 1,
) -> list[RunRecord]:
    """Run every config, skipping archives that already exist.

    Returns one record per config in grid order; failures are recorded
    without aborting the sweep.
    """
    os.makedirs(out_dir, exist_ok=True)
    records: dict[int, RunRecord] = {}
    pending: list[tuple[int, dict, str]] = []
    for i, config in enumerate(configs):
        name = archive_name(config)
        path = os.path.join(out_dir, name)
        if os.path.exists(path):
            doc = read_archive(path)
            row = {**config.flat(), **_summary_row(doc["summary"])}
            records[i] = RunRecord(i, name, "cached", 0.0, row=row)
        else:
            pending.append((i, config.to_dict(), out_dir))

    if pending:
        if workers > 1:
            with multiprocessing.Pool(workers) as pool:
                for rec in pool.imap_unordered(_execute_one, pending):
                    records[rec.index] = rec
        else:
            for task in pending:
                rec = _execute_one(task)
                records[rec.index] = rec

    ordered = [records[i] for i in range(len(configs))]
    _write_manifest(out_dir, ordered)
    _write_results_csv(out_dir, ordered)
    return ordered


def _write_manifest(out_dir: str, records: list[RunRecord]) -> None:
    doc = [
        {
            "index": r.index,
            "archive": r.archive,
            "status": r.status,
            "wall_clock_sec": round(r.wall_clock, 3),
            "error": r.error,
        }
        for r in records
    ]
    with open(os.path.join(out_dir, MANIFEST_JSON), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _write_results_csv(out_dir: str, records: list[RunRecord]) -> None:
    fieldnames = ["index", "archive"] + FLAT_CONFIG_FIELDS + SUMMARY_FIELDS
    with open(os.path.join(out_dir, RESULTS_CSV), "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for r in records:
            if r.row is None:
                continue
            writer.writerow({"index": r.index, "archive": r.archive, **r.row})


def failed_records(records: list[RunRecord]) -> list[RunRecord]:
    return [r for r in records if r.status == "failed"]

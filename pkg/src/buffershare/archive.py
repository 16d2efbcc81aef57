"""Per-experiment archive files: config, summary, and snapshots.

One gzip-compressed file per experiment holding line-delimited JSON: the
first line is the config document, the second the summary, and every
following line one snapshot. Keys are sorted and the gzip mtime is pinned
to zero so identical runs produce byte-identical archives.
"""

from __future__ import annotations

import dataclasses
import gzip
import json
import os
from typing import Any

from .config import SCHEMA_VERSION, ExperimentConfig
from .core import GENERATOR_NAME
from .telemetry import ExperimentSummary, Snapshot

ARCHIVE_SUFFIX = ".jsonl.gz"


class SchemaMismatchError(RuntimeError):
    pass


def _dump(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def archive_name(config: ExperimentConfig) -> str:
    return f"exp-{config.digest()}{ARCHIVE_SUFFIX}"


def write_archive(
    path: str,
    config: ExperimentConfig,
    summary: ExperimentSummary,
    snapshots: list[Snapshot],
) -> None:
    """Atomically write one experiment archive (temp file + rename)."""
    lines = [
        _dump({
            "section": "config",
            "schema_version": SCHEMA_VERSION,
            "generator": GENERATOR_NAME,
            **config.to_dict(),
        }),
        _dump({"section": "summary", **dataclasses.asdict(summary)}),
    ]
    lines.extend(_dump({"section": "snapshot", **dataclasses.asdict(s)}) for s in snapshots)
    blob = gzip.compress(("\n".join(lines) + "\n").encode("utf-8"), 9, mtime=0)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)


def read_archive(path: str) -> dict[str, Any]:
    """Parse an archive into {"config": ..., "summary": ..., "snapshots": [...]}.

    Raises SchemaMismatchError when the file was written by an incompatible
    schema version.
    """
    with gzip.open(path, "rt", encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("section") != "config":
        raise ValueError(f"{path}: not a buffershare archive")
    config_doc = lines[0]
    version = config_doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaMismatchError(
            f"{path}: archive schema_version {version} != supported {SCHEMA_VERSION}"
        )
    summary_doc = next((l for l in lines[1:] if l.get("section") == "summary"), None)
    if summary_doc is None:
        raise ValueError(f"{path}: missing summary section")
    snapshots = [l for l in lines[1:] if l.get("section") == "snapshot"]
    return {"config": config_doc, "summary": summary_doc, "snapshots": snapshots}


def load_config(path: str) -> ExperimentConfig:
    doc = dict(read_archive(path)["config"])
    doc.pop("section", None)
    doc.pop("generator", None)
    return ExperimentConfig.from_dict(doc)

"""Experiment configuration, the sweep grid, and its declarative file format.

A grid file lists candidate values per dimension (with human units: "25ms",
"12.5Gbps", "400KB"); the grid is their Cartesian product filtered by the
constraint flags. Per-experiment seeds are derived from the master seed and
the config's index so reordering dimensions never silently reseeds runs.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import re
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Optional

import yaml

from .core import MS, SEC, US
from .experiment import DEFAULT_START_WINDOW
from .network import DumbbellSpec, NetworkConditions
from .qdisc import DEFAULT_CAPACITY, SharedBufferConfig

SCHEMA_VERSION = 1

_SIZE_UNITS = {"b": 1, "kb": 10**3, "mb": 10**6, "gb": 10**9}
_RATE_UNITS = {"bps": 1, "kbps": 10**3, "mbps": 10**6, "gbps": 10**9}
_TIME_UNITS = {"ns": 1, "us": US, "ms": MS, "s": SEC}
_UNIT_RE = re.compile(r"^\s*([0-9.]+)\s*([a-zA-Z]*)\s*$")


def _parse_with_units(value: Any, units: dict[str, int], what: str) -> int:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return int(round(value))
    m = _UNIT_RE.match(str(value))
    if not m or (m.group(2) and m.group(2).lower() not in units):
        raise ValueError(f"cannot parse {what} value {value!r}")
    scale = units[m.group(2).lower()] if m.group(2) else 1
    return int(round(float(m.group(1)) * scale))


def parse_size(value: Any) -> int:
    """Bytes from '20KB', '1.8MB', or a raw number (decimal units)."""
    return _parse_with_units(value, _SIZE_UNITS, "size")


def parse_rate(value: Any) -> int:
    """Bits/second from '25Gbps', '100Mbps', or a raw number."""
    return _parse_with_units(value, _RATE_UNITS, "rate")


def parse_duration(value: Any) -> int:
    """Nanoseconds from '50us', '25ms', '2.5s', or a raw number."""
    return _parse_with_units(value, _TIME_UNITS, "duration")


@dataclass(frozen=True)
class ExperimentConfig:
    """One grid point plus its seed; everything a worker needs to run."""

    conditions: NetworkConditions
    buffer: SharedBufferConfig
    n_dctcp_senders: int = 10
    n_cubic_senders: int = 10
    flows_per_sender: int = 10
    sim_duration: int = 120 * SEC
    snapshot_mean: Optional[int] = 10 * MS
    start_window: int = DEFAULT_START_WINDOW
    seed: int = 0
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        if self.sim_duration <= 0 or self.start_window < 0:
            raise ValueError("durations must be positive")
        if self.snapshot_mean is not None and self.snapshot_mean <= 0:
            raise ValueError("snapshot_mean must be positive or None")

    def dumbbell_spec(self) -> DumbbellSpec:
        return DumbbellSpec(
            n_dctcp_senders=self.n_dctcp_senders,
            n_cubic_senders=self.n_cubic_senders,
            flows_per_sender=self.flows_per_sender,
            conditions=self.conditions,
            buffer=self.buffer,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        doc["conditions"] = NetworkConditions(**doc["conditions"])
        doc["buffer"] = SharedBufferConfig(**doc["buffer"])
        return cls(**doc)

    def flat(self) -> dict:
        """Flattened view with the archive/CSV field names."""
        return {
            "seed": self.seed,
            "ecn_threshold": self.buffer.ecn_threshold,
            "red_min": self.buffer.red_min,
            "red_max": self.buffer.red_max,
            "capacity": self.buffer.capacity,
            "max_drop_prob": self.buffer.max_drop_prob,
            "avg_weight": self.buffer.avg_weight,
            "cubic_rtt": self.conditions.cubic_rtt,
            "dctcp_rtt": self.conditions.dctcp_rtt,
            "line_rate": self.conditions.line_rate,
            "receiver_link_delay": self.conditions.receiver_link_delay,
            "n_dctcp_senders": self.n_dctcp_senders,
            "n_cubic_senders": self.n_cubic_senders,
            "flows_per_sender": self.flows_per_sender,
            "sim_duration": self.sim_duration,
            "snapshot_mean": self.snapshot_mean,
            "start_window": self.start_window,
            "schema_version": self.schema_version,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def derive_seed(master_seed: int, index: int) -> int:
    """Stable 63-bit per-experiment seed from (master seed, grid index)."""
    blob = f"{master_seed}:{index}".encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big") >> 1


@dataclass
class GridSpec:
    """Candidate value lists per dimension plus constraint flags.

    Pairs with red_min > red_max are always dropped; ``drop_tail_only``
    additionally keeps only red_min == red_max settings.
    """

    cubic_rtts: list[int] = field(default_factory=lambda: [50 * MS])
    dctcp_rtts: list[int] = field(default_factory=lambda: [50 * US])
    line_rates: list[int] = field(default_factory=lambda: [25 * 10**9])
    receiver_link_delays: list[int] = field(default_factory=lambda: [0])
    capacities: list[int] = field(default_factory=lambda: [DEFAULT_CAPACITY])
    ecn_thresholds: list[int] = field(default_factory=lambda: [100_000])
    red_mins: list[int] = field(default_factory=lambda: [DEFAULT_CAPACITY])
    red_maxes: list[int] = field(default_factory=lambda: [DEFAULT_CAPACITY])
    drop_probs: list[float] = field(default_factory=lambda: [0.05])
    avg_weights: list[float] = field(default_factory=lambda: [1.0])
    n_dctcp_senders: list[int] = field(default_factory=lambda: [10])
    n_cubic_senders: list[int] = field(default_factory=lambda: [10])
    flows_per_sender: list[int] = field(default_factory=lambda: [10])
    sim_durations: list[int] = field(default_factory=lambda: [120 * SEC])
    snapshot_means: list[Optional[int]] = field(default_factory=lambda: [10 * MS])
    start_windows: list[int] = field(default_factory=lambda: [DEFAULT_START_WINDOW])
    drop_tail_only: bool = False
    master_seed: int = 0

    def __post_init__(self) -> None:
        for f in fields(self):
            if f.type.startswith("list") and not getattr(self, f.name):
                raise ValueError(f"grid dimension {f.name} must be nonempty")


def generate_grid(spec: GridSpec, master_seed: Optional[int] = None) -> list[ExperimentConfig]:
    """Expand a GridSpec into its ordered, seeded config list.

    Deterministic: the same spec always yields the same ordered list, and
    per-experiment seeds depend only on (master seed, final index).
    """
    if master_seed is None:
        master_seed = spec.master_seed
    configs: list[ExperimentConfig] = []
    dims = itertools.product(
        spec.line_rates,
        spec.cubic_rtts,
        spec.dctcp_rtts,
        spec.receiver_link_delays,
        spec.capacities,
        spec.ecn_thresholds,
        spec.red_mins,
        spec.red_maxes,
        spec.drop_probs,
        spec.avg_weights,
        spec.n_dctcp_senders,
        spec.n_cubic_senders,
        spec.flows_per_sender,
        spec.sim_durations,
        spec.snapshot_means,
        spec.start_windows,
    )
    for (rate, c_rtt, d_rtt, recv_delay, cap, ecn, red_min, red_max, prob,
         weight, n_d, n_c, fps, dur, snap, start_w) in dims:
        if red_min > red_max:
            continue
        if spec.drop_tail_only and red_min != red_max:
            continue
        if ecn > cap or red_max > cap:
            continue
        configs.append(ExperimentConfig(
            conditions=NetworkConditions(
                cubic_rtt=c_rtt, dctcp_rtt=d_rtt, line_rate=rate,
                receiver_link_delay=recv_delay,
            ),
            buffer=SharedBufferConfig(
                capacity=cap, ecn_threshold=ecn, red_min=red_min,
                red_max=red_max, max_drop_prob=prob, avg_weight=weight,
            ),
            n_dctcp_senders=n_d,
            n_cubic_senders=n_c,
            flows_per_sender=fps,
            sim_duration=dur,
            snapshot_mean=snap,
            start_window=start_w,
            seed=derive_seed(master_seed, len(configs)),
        ))
    if not configs:
        raise ValueError("grid is empty after applying constraints")
    return configs


# -- declarative grid files -------------------------------------------------

_FIELD_PARSERS = {
    "cubic_rtts": parse_duration,
    "dctcp_rtts": parse_duration,
    "receiver_link_delays": parse_duration,
    "sim_durations": parse_duration,
    "start_windows": parse_duration,
    "line_rates": parse_rate,
    "capacities": parse_size,
    "ecn_thresholds": parse_size,
    "red_mins": parse_size,
    "red_maxes": parse_size,
    "drop_probs": float,
    "avg_weights": float,
    "n_dctcp_senders": int,
    "n_cubic_senders": int,
    "flows_per_sender": int,
}


def _expand_values(raw: Any, parse) -> list:
    """A scalar, a list, or an inclusive {start, stop, step} range."""
    if isinstance(raw, dict):
        start, stop, step = (parse(raw[k]) for k in ("start", "stop", "step"))
        if step <= 0:
            raise ValueError("range step must be positive")
        return list(range(start, stop + 1, step))
    if isinstance(raw, list):
        return [parse(v) for v in raw]
    return [parse(raw)]


def load_grid_file(path: str) -> GridSpec:
    """Read a YAML/JSON grid spec with human-readable units."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"grid file {path} must contain a mapping")
    kwargs: dict[str, Any] = {}
    for key, raw in doc.items():
        if key == "red_thresholds":
            values = _expand_values(raw, parse_size)
            kwargs["red_mins"] = values
            kwargs["red_maxes"] = values
        elif key in _FIELD_PARSERS:
            kwargs[key] = _expand_values(raw, _FIELD_PARSERS[key])
        elif key == "snapshot_means":
            kwargs[key] = [
                None if v in (None, "none", "off") else parse_duration(v)
                for v in (raw if isinstance(raw, list) else [raw])
            ]
        elif key == "drop_tail_only":
            kwargs[key] = bool(raw)
        elif key == "master_seed":
            kwargs[key] = int(raw)
        else:
            raise ValueError(f"unknown grid dimension {key!r}")
    return GridSpec(**kwargs)


# -- shipped presets ----------------------------------------------------------

def desk_grid() -> GridSpec:
    """CI-affordable sweep: 1 Gbps, short runs, scaled-down sender counts."""
    return GridSpec(
        cubic_rtts=[25 * MS],
        dctcp_rtts=[200 * US],
        line_rates=[10**9],
        ecn_thresholds=[20_000, 100_000, 200_000, 400_000],
        red_mins=[200_000, 800_000, 1_600_000, 1_800_000],
        red_maxes=[200_000, 800_000, 1_600_000, 1_800_000],
        drop_tail_only=True,
        n_dctcp_senders=[5],
        n_cubic_senders=[5],
        flows_per_sender=[4],
        sim_durations=[10 * SEC],
        snapshot_means=[10 * MS],
    )


def paper_grid() -> GridSpec:
    """The full published parameter ranges (hours of compute per point)."""
    return GridSpec(
        cubic_rtts=[25 * MS, 50 * MS, 100 * MS],
        dctcp_rtts=[50 * US],
        line_rates=[5 * 10**9, 12_500_000_000, 25 * 10**9],
        ecn_thresholds=list(range(0, 400_001, 20_000)),
        red_mins=list(range(0, 1_800_001, 100_000)),
        red_maxes=list(range(0, 1_800_001, 100_000)),
        drop_probs=[0.05],
        n_dctcp_senders=[10],
        n_cubic_senders=[10],
        flows_per_sender=[10],
        sim_durations=[120 * SEC],
        snapshot_means=[10 * MS],
    )


PRESETS = {"desk": desk_grid, "paper": paper_grid}

FLAT_CONFIG_FIELDS = [
    "seed", "ecn_threshold", "red_min", "red_max", "capacity", "max_drop_prob",
    "avg_weight", "cubic_rtt", "dctcp_rtt", "line_rate", "receiver_link_delay",
    "n_dctcp_senders", "n_cubic_senders", "flows_per_sender", "sim_duration",
    "snapshot_mean", "start_window", "schema_version",
]

SUMMARY_FIELDS = [
    "cubic_share", "total_drops", "avg_buffer", "max_buffer", "total_goodput",
    "marked_ecn", "duration", "zero_goodput",
]

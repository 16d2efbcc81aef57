"""Shared-buffer queue discipline: ECN marking for ECT traffic, RED dropping
for non-ECT traffic, hard drop-tail at capacity.

One FIFO holds both traffic classes. At enqueue the ECT bit decides the
treatment: ECT packets are CE-marked once the queue sits at or above the ECN
threshold; non-ECT packets go through the RED min/max/probability check.
Drop-tail behaviour is the degenerate RED setting min == max.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .core import RandomSource
from .network import Packet

DEFAULT_CAPACITY = 1_800_000  # bytes, production shallow-buffer switch
DEFAULT_MAX_DROP_PROB = 0.05


class Verdict(Enum):
    ENQUEUED = "enqueued"
    ENQUEUED_MARKED = "enqueued_marked"
    DROPPED_OVERFLOW = "dropped_overflow"
    DROPPED_RED = "dropped_red"


@dataclass(frozen=True)
class SharedBufferConfig:
    """Router buffer settings: capacity, ECN threshold, RED thresholds.

    ``avg_weight`` is the EWMA weight for the RED queue average; the default
    1.0 makes the average instantaneous, so min == max reproduces exact
    drop-tail behaviour and keeps runs deterministic up to the Bernoulli
    drop draw. Set a smaller weight for classic smoothed RED.
    """

    capacity: int = DEFAULT_CAPACITY
    ecn_threshold: int = DEFAULT_CAPACITY
    red_min: int = DEFAULT_CAPACITY
    red_max: int = DEFAULT_CAPACITY
    max_drop_prob: float = DEFAULT_MAX_DROP_PROB
    avg_weight: float = 1.0

    def __post_init__(self) -> None:
        if not 0 <= self.ecn_threshold <= self.capacity:
            raise ValueError("ecn_threshold must lie in [0, capacity]")
        if not 0 <= self.red_min <= self.red_max <= self.capacity:
            raise ValueError("need 0 <= red_min <= red_max <= capacity")
        if not 0 <= self.max_drop_prob <= 1:
            raise ValueError("max_drop_prob must lie in [0, 1]")
        if not 0 < self.avg_weight <= 1:
            raise ValueError("avg_weight must lie in (0, 1]")


@dataclass
class QueueState:
    """Live FIFO contents plus the counters exported to archives.

    Counter names (enqueued, dequeued, dropped_overflow, dropped_red,
    marked_ecn) are part of the archive schema; do not rename.
    """

    bytes_queued: int = 0
    avg_queue: float = 0.0
    fifo: deque = field(default_factory=deque)
    enqueued: int = 0
    dequeued: int = 0
    dropped_overflow: int = 0
    dropped_red: int = 0
    marked_ecn: int = 0
    max_bytes_seen: int = 0

    def counters(self) -> dict[str, int]:
        return {
            "enqueued": self.enqueued,
            "dequeued": self.dequeued,
            "dropped_overflow": self.dropped_overflow,
            "dropped_red": self.dropped_red,
            "marked_ecn": self.marked_ecn,
        }


def red_drop_probability(avg_queue: float, cfg: SharedBufferConfig) -> float:
    """Piecewise-linear RED drop probability for a non-ECT arrival.

    Zero below red_min, max_drop_prob * (avg - min) / (max - min) on
    [min, max), and 1 at or above red_max. min == max degenerates to a step
    at that threshold (drop-tail).
    """
    if avg_queue < cfg.red_min:
        return 0.0
    if avg_queue >= cfg.red_max:
        return 1.0
    span = cfg.red_max - cfg.red_min
    return cfg.max_drop_prob * (avg_queue - cfg.red_min) / span


def enqueue(
    q: QueueState, cfg: SharedBufferConfig, pkt: Packet, rng: RandomSource
) -> Verdict:
    """Apply the shared-buffer admission logic to one arriving data packet.

    Order matters: the capacity check guards every packet; the ECN threshold
    and RED average are compared against the queue as the packet observes it,
    before its own bytes are added.
    """
    if q.bytes_queued + pkt.wire_len > cfg.capacity:
        q.dropped_overflow += 1
        return Verdict.DROPPED_OVERFLOW

    if pkt.ect:
        marked = q.bytes_queued >= cfg.ecn_threshold
        if marked:
            pkt.ce = True
            q.marked_ecn += 1
        _admit(q, pkt)
        return Verdict.ENQUEUED_MARKED if marked else Verdict.ENQUEUED

    w = cfg.avg_weight
    q.avg_queue = (1.0 - w) * q.avg_queue + w * q.bytes_queued
    p = red_drop_probability(q.avg_queue, cfg)
    if p >= 1.0 or (p > 0.0 and rng.random() < p):
        q.dropped_red += 1
        return Verdict.DROPPED_RED
    _admit(q, pkt)
    return Verdict.ENQUEUED


def _admit(q: QueueState, pkt: Packet) -> None:
    q.fifo.append(pkt)
    q.bytes_queued += pkt.wire_len
    q.enqueued += 1
    if q.bytes_queued > q.max_bytes_seen:
        q.max_bytes_seen = q.bytes_queued


def dequeue(q: QueueState) -> Packet | None:
    """Remove and return the FIFO head, or None when the queue is idle."""
    if not q.fifo:
        return None
    pkt = q.fifo.popleft()
    q.bytes_queued -= pkt.wire_len
    q.dequeued += 1
    return pkt

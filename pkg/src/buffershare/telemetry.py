"""Poisson-sampled runtime snapshots and end-of-run outcome aggregation.

Snapshots are taken at exponentially spaced intervals so the time-average of
any sampled quantity is unbiased (PASTA); the buffer maximum is tracked
exactly by the queue itself because sparse sampling would underestimate it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .core import EventLoop, RandomSource
from .qdisc import QueueState


@dataclass
class Snapshot:
    t: int
    queue_bytes: int
    counters: dict[str, int]
    per_group_goodput_bytes: dict[str, int]
    per_group_retransmits: dict[str, int]


@dataclass
class ExperimentSummary:
    """Final per-experiment outcomes: the buffer-sharing metrics under study."""

    cubic_share: float
    total_drops: int
    avg_buffer: float
    max_buffer: int
    total_goodput: int
    per_flow_goodput: list[int] = field(default_factory=list)
    marked_ecn: int = 0
    duration: int = 0
    zero_goodput: bool = False


class Sampler:
    """Schedules snapshots at Exp(mean_interval)-spaced times.

    ``mean_interval=None`` disables periodic sampling: only the initial and
    final snapshots are recorded. The RNG must be a dedicated substream so
    sampling never perturbs other consumers' draws.
    """

    def __init__(
        self,
        engine: EventLoop,
        rng: RandomSource,
        mean_interval: Optional[int],
        probe: Callable[[], Snapshot],
    ):
        if mean_interval is not None and mean_interval <= 0:
            raise ValueError("snapshot mean interval must be positive")
        self.engine = engine
        self.rng = rng
        self.mean_interval = mean_interval
        self.probe = probe
        self.snapshots: list[Snapshot] = []

    def start(self) -> None:
        self.snapshots.append(self.probe())
        if self.mean_interval is not None:
            self._schedule_next()

    def _schedule_next(self) -> None:
        self.engine.schedule(self.rng.exponential(self.mean_interval), self._fire)

    def _fire(self) -> None:
        self.snapshots.append(self.probe())
        self._schedule_next()

    def take_final(self) -> None:
        self.snapshots.append(self.probe())


def finalize(
    snapshots: list[Snapshot],
    queue: QueueState,
    per_flow_goodput: list[int],
    per_group_goodput: dict[str, int],
    duration: int,
) -> ExperimentSummary:
    """Aggregate a finished run into its outcome metrics.

    Cubic's share is computed over goodput (unique delivered bytes);
    avg_buffer is the unweighted mean over snapshots; max_buffer is the
    queue's exact running maximum.
    """
    dctcp_bytes = per_group_goodput.get("dctcp", 0)
    cubic_bytes = per_group_goodput.get("cubic", 0)
    total = dctcp_bytes + cubic_bytes
    zero_goodput = total == 0
    cubic_share = 0.0 if zero_goodput else cubic_bytes / total
    avg_buffer = (
        sum(s.queue_bytes for s in snapshots) / len(snapshots) if snapshots else 0.0
    )
    return ExperimentSummary(
        cubic_share=cubic_share,
        total_drops=queue.dropped_overflow + queue.dropped_red,
        avg_buffer=avg_buffer,
        max_buffer=queue.max_bytes_seen,
        total_goodput=sum(per_flow_goodput),
        per_flow_goodput=list(per_flow_goodput),
        marked_ecn=queue.marked_ecn,
        duration=duration,
        zero_goodput=zero_goodput,
    )

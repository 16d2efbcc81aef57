"""Deterministic discrete-event engine and seeded random streams.

Simulation time is an integer count of nanoseconds so that sub-microsecond
serialization delays stay exact; floating-point clocks drift over long runs.
"""

from __future__ import annotations

import hashlib
import heapq
from typing import Callable

import numpy as np

# Time unit helpers (nanoseconds).
NS = 1
US = 1_000
MS = 1_000_000
SEC = 1_000_000_000

#: Identity of the PRNG family, recorded in experiment archives.
GENERATOR_NAME = "pcg64"


def seconds(t_ns: int) -> float:
    return t_ns / SEC


class RandomSource:
    """Seeded random stream backed by numpy's PCG64 (128-bit state).

    Identical seeds yield identical draw sequences across runs and platforms.
    ``fork(name)`` derives an independent substream so that adding a consumer
    never perturbs the draws seen by existing ones.
    """

    def __init__(self, seed: int, _spawn_key: tuple[int, ...] = ()):
        self.seed = seed
        self._spawn_key = _spawn_key
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(seed, spawn_key=_spawn_key))
        )

    def fork(self, name: str) -> "RandomSource":
        """Derive the substream identified by ``name`` (stable across platforms)."""
        digest = hashlib.sha256(name.encode("utf-8")).digest()
        key = int.from_bytes(digest[:8], "big")
        return RandomSource(self.seed, self._spawn_key + (key,))

    def exponential(self, mean: float) -> float:
        """Sample from Exp with the given mean (mean > 0)."""
        if mean <= 0:
            raise ValueError("exponential mean must be positive")
        return float(self._gen.exponential(mean))

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform sample in [lo, hi); degenerate lo == hi returns lo."""
        if lo > hi:
            raise ValueError("uniform bounds out of order")
        if lo == hi:
            return float(lo)
        return float(self._gen.uniform(lo, hi))

    def random(self) -> float:
        """Uniform sample in [0, 1)."""
        return float(self._gen.random())


def draw_exponential(rng: RandomSource, mean: float) -> float:
    return rng.exponential(mean)


def draw_uniform(rng: RandomSource, lo: float, hi: float) -> float:
    return rng.uniform(lo, hi)


class EventHandle:
    """Cancellation handle for a scheduled event (lazy invalidation)."""

    __slots__ = ("fire_at", "seq", "cancelled")

    def __init__(self, fire_at: int, seq: int):
        self.fire_at = fire_at
        self.seq = seq
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True


_NO_ARG = object()


class EventLoop:
    """Single-threaded event loop ordered by (fire_at, insertion seq).

    The (fire_at, seq) order is total and deterministic: simultaneous events
    fire in insertion order, and no event ever executes with fire_at below
    the current clock. ``post`` is the allocation-light path for the packet
    hot loop; ``schedule``/``schedule_at`` return cancellation handles.
    """

    def __init__(self) -> None:
        self._queue: list[tuple] = []
        self._seq = 0
        self._now = 0
        self._running = False

    @property
    def now(self) -> int:
        return self._now

    def schedule(self, delay: int | float, action: Callable[[], None]) -> EventHandle:
        """Schedule ``action`` to fire at now + delay (delay >= 0, in ns)."""
        if delay < 0:
            raise ValueError("cannot schedule into the past")
        return self.schedule_at(self._now + int(round(delay)), action)

    def schedule_at(self, fire_at: int, action: Callable[[], None]) -> EventHandle:
        if fire_at < self._now:
            raise ValueError("cannot schedule into the past")
        self._seq += 1
        handle = EventHandle(fire_at, self._seq)
        heapq.heappush(self._queue, (fire_at, self._seq, handle, action, _NO_ARG))
        return handle

    def post(self, fire_at: int, fn: Callable, arg=_NO_ARG) -> None:
        """Fast non-cancellable scheduling: fires fn(arg) at ``fire_at``."""
        self._seq += 1
        heapq.heappush(self._queue, (fire_at, self._seq, None, fn, arg))

    def run_until(self, end: int) -> int:
        """Execute all events with fire_at <= end; leave the clock at ``end``.

        Returns the number of events executed. Events scheduled beyond ``end``
        stay queued for a later call.
        """
        if self._running:
            raise RuntimeError("event loop already running")
        self._running = True
        executed = 0
        queue = self._queue
        pop = heapq.heappop
        no_arg = _NO_ARG
        try:
            while queue:
                entry = queue[0]
                if entry[0] > end:
                    break
                pop(queue)
                handle = entry[2]
                if handle is not None and handle.cancelled:
                    continue
                self._now = entry[0]
                if entry[4] is no_arg:
                    entry[3]()
                else:
                    entry[3](entry[4])
                executed += 1
        finally:
            self._running = False
        if end > self._now:
            self._now = end
        return executed

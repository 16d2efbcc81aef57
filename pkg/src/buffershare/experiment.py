"""Dumbbell assembly and the single-experiment run loop.

Topology: every sender node gets a dedicated access link to the switch at
the bottleneck line rate with one-way delay RTT/2 for its group; the
switch-to-receiver link runs at the line rate behind the shared-buffer
queue with zero propagation by default, so the configured group RTTs are
exact. The reverse ACK path mirrors the forward delays with no queueing.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial

from .core import SEC, EventLoop, RandomSource
from .network import DumbbellSpec, Link, Packet, make_ack_packet
from .qdisc import QueueState, SharedBufferConfig, dequeue, enqueue
from .telemetry import ExperimentSummary, Sampler, Snapshot, finalize
from .transport import CcKind, FlowReceiverState, FlowSender, rto_floor_for_path

DEFAULT_START_WINDOW = 1 * SEC  # flow-start jitter to break synchronization


@dataclass
class _Flow:
    sender: FlowSender
    receiver: FlowReceiverState
    group: CcKind
    start_time: int
    reverse_delay: int


class Dumbbell:
    """One wired simulation instance: links, shared queue, flows, sampler."""

    def __init__(self, spec: DumbbellSpec, engine: EventLoop, rng: RandomSource,
                 start_window: int = DEFAULT_START_WINDOW):
        self.spec = spec
        self.engine = engine
        self.rng = rng
        self.queue = QueueState()
        self.buffer: SharedBufferConfig = spec.buffer
        cond = spec.conditions
        self.bottleneck = Link(cond.line_rate, cond.receiver_link_delay)
        self._red_rng = rng.fork("red")
        self._busy = False

        starts_rng = rng.fork("flow-starts")
        self.flows: list[_Flow] = []
        self.access_links: list[Link] = []
        groups = [
            (CcKind.DCTCP, spec.n_dctcp_senders, cond.dctcp_rtt),
            (CcKind.CUBIC, spec.n_cubic_senders, cond.cubic_rtt),
        ]
        flow_id = 0
        for kind, n_senders, rtt in groups:
            one_way = rtt // 2
            rto_floor = rto_floor_for_path(
                rtt + 2 * cond.receiver_link_delay,
                self.buffer.capacity,
                cond.line_rate,
            )
            for _ in range(n_senders):
                access = Link(cond.line_rate, one_way)
                self.access_links.append(access)
                for _ in range(spec.flows_per_sender):
                    sender = FlowSender(
                        engine, flow_id, kind,
                        emit=partial(self._on_send, access),
                        rto_floor=rto_floor,
                    )
                    start = int(round(starts_rng.uniform(0, start_window)))
                    self.flows.append(_Flow(
                        sender=sender,
                        receiver=FlowReceiverState(),
                        group=kind,
                        start_time=start,
                        reverse_delay=one_way + cond.receiver_link_delay,
                    ))
                    flow_id += 1

    # -- forward path ------------------------------------------------------

    def _on_send(self, access: Link, pkt: Packet) -> None:
        arrival = access.transmit(pkt, self.engine.now)
        self.engine.post(arrival, self._on_switch_arrival, pkt)

    def _on_switch_arrival(self, pkt: Packet) -> None:
        enqueue(self.queue, self.buffer, pkt, self._red_rng)
        if not self._busy:
            self._service_next()

    def _service_next(self) -> None:
        pkt = dequeue(self.queue)
        if pkt is None:
            self._busy = False
            return
        self._busy = True
        done = self.engine.now + self.bottleneck.serialization_ns(pkt.wire_len)
        self.engine.post(done, self._on_service_done, pkt)

    def _on_service_done(self, pkt: Packet) -> None:
        prop = self.bottleneck.prop_delay
        if prop == 0:
            self._deliver(pkt)
        else:
            self.engine.post(self.engine.now + prop, self._deliver, pkt)
        self._service_next()

    # -- receiver and reverse path ------------------------------------------

    def _deliver(self, pkt: Packet) -> None:
        flow = self.flows[pkt.flow_id]
        ack_seq = flow.receiver.on_data(pkt)
        now = self.engine.now
        ack = make_ack_packet(pkt.flow_id, ack_seq, pkt.ce, now)
        self.engine.post(now + flow.reverse_delay, flow.sender.on_ack, ack)

    # -- telemetry -----------------------------------------------------------

    def snapshot(self) -> Snapshot:
        goodput = {"dctcp": 0, "cubic": 0}
        retrans = {"dctcp": 0, "cubic": 0}
        for flow in self.flows:
            goodput[flow.group.value] += flow.receiver.unique_bytes
            retrans[flow.group.value] += flow.sender.retransmitted_packets
        return Snapshot(
            t=self.engine.now,
            queue_bytes=self.queue.bytes_queued,
            counters=self.queue.counters(),
            per_group_goodput_bytes=goodput,
            per_group_retransmits=retrans,
        )

    # -- run -----------------------------------------------------------------

    def run(self, duration: int, snapshot_mean: int | None) -> "ExperimentResult":
        sampler = Sampler(self.engine, self.rng.fork("sampling"), snapshot_mean,
                          self.snapshot)
        for flow in self.flows:
            self.engine.post(flow.start_time, flow.sender.start)
        sampler.start()
        self.engine.run_until(duration)
        sampler.take_final()
        per_flow = [flow.receiver.unique_bytes for flow in self.flows]
        per_group = sampler.snapshots[-1].per_group_goodput_bytes
        summary = finalize(sampler.snapshots, self.queue, per_flow, per_group, duration)
        return ExperimentResult(summary, sampler.snapshots, self.queue, self)


@dataclass
class ExperimentResult:
    summary: ExperimentSummary
    snapshots: list[Snapshot]
    queue: QueueState
    dumbbell: "Dumbbell"


def build_dumbbell(
    spec: DumbbellSpec,
    engine: EventLoop | None = None,
    rng: RandomSource | None = None,
    seed: int = 0,
    start_window: int = DEFAULT_START_WINDOW,
) -> Dumbbell:
    """Wire a dumbbell simulation instance from its topology description."""
    if engine is None:
        engine = EventLoop()
    if rng is None:
        rng = RandomSource(seed)
    return Dumbbell(spec, engine, rng, start_window=start_window)


def run_experiment(config) -> ExperimentResult:
    """Execute one ExperimentConfig in a fresh single-threaded instance."""
    dumbbell = build_dumbbell(
        config.dumbbell_spec(),
        seed=config.seed,
        start_window=config.start_window,
    )
    return dumbbell.run(config.sim_duration, config.snapshot_mean)

"""Packets, rate/delay links, and the dumbbell topology description.

Wire sizes follow conventional Ethernet/TCP values: 1500 B data frames with
1448 B of payload, 64 B ACKs. ACKs travel an ideal reverse path and never
meet the shared switch queue.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import SEC

DATA_WIRE_LEN = 1500
DATA_PAYLOAD_LEN = 1448
ACK_WIRE_LEN = 64


@dataclass(slots=True)
class Packet:
    """One simulated frame. For ACKs, ``seq`` carries the cumulative ACK
    byte offset and ``payload_len`` is zero.

    ``ect`` tells the shared queue whether the flow understands ECN (set for
    DCTCP traffic); ``ce`` is the congestion mark applied by the queue and
    ``ece_echo`` its receiver-to-sender reflection.
    """

    flow_id: int
    seq: int
    payload_len: int
    wire_len: int
    is_ack: bool
    ect: bool
    ce: bool
    ece_echo: bool
    send_time: int


class Link:
    """Store-and-forward link: serialization at ``rate`` plus fixed delay.

    ``busy_until`` tracks the tail of the serialization schedule and never
    decreases, which gives per-link FIFO delivery.
    """

    __slots__ = ("rate", "prop_delay", "busy_until")

    def __init__(self, rate: int, prop_delay: int):
        if rate <= 0:
            raise ValueError("link rate must be positive")
        self.rate = rate
        self.prop_delay = prop_delay
        self.busy_until = 0

    def serialization_ns(self, wire_len: int) -> int:
        return (wire_len * 8 * SEC + self.rate // 2) // self.rate

    def transmit(self, pkt: Packet, at: int) -> int:
        """Queue ``pkt`` for serialization at time ``at``; return delivery time."""
        start = at if at > self.busy_until else self.busy_until
        self.busy_until = start + self.serialization_ns(pkt.wire_len)
        return self.busy_until + self.prop_delay


@dataclass(frozen=True)
class NetworkConditions:
    """Static path properties: per-group base RTTs and the bottleneck rate.

    ``receiver_link_delay`` is the optional extra one-way delay on the
    switch-to-receiver hop (applied in both directions); the default 0 keeps
    the configured group RTTs exact.
    """

    cubic_rtt: int = 50 * (SEC // 1000)
    dctcp_rtt: int = 50_000
    line_rate: int = 25_000_000_000
    receiver_link_delay: int = 0

    def __post_init__(self) -> None:
        if self.cubic_rtt <= 0 or self.dctcp_rtt <= 0 or self.line_rate <= 0:
            raise ValueError("RTTs and line rate must be positive")
        if self.receiver_link_delay < 0:
            raise ValueError("receiver_link_delay must be nonnegative")


@dataclass(frozen=True)
class DumbbellSpec:
    """Topology description: two sender groups feeding one shared queue."""

    n_dctcp_senders: int
    n_cubic_senders: int
    flows_per_sender: int
    conditions: "NetworkConditions"
    buffer: object  # SharedBufferConfig; typed loosely to avoid an import cycle

    def __post_init__(self) -> None:
        if min(self.n_dctcp_senders, self.n_cubic_senders, self.flows_per_sender) < 0:
            raise ValueError("counts must be nonnegative")
        if self.n_dctcp_senders + self.n_cubic_senders == 0:
            raise ValueError("dumbbell needs at least one sender")
        if self.flows_per_sender == 0:
            raise ValueError("dumbbell needs at least one flow per sender")


def make_data_packet(flow_id: int, seq: int, ect: bool, send_time: int) -> Packet:
    return Packet(
        flow_id=flow_id,
        seq=seq,
        payload_len=DATA_PAYLOAD_LEN,
        wire_len=DATA_WIRE_LEN,
        is_ack=False,
        ect=ect,
        ce=False,
        ece_echo=False,
        send_time=send_time,
    )


def make_ack_packet(flow_id: int, ack_seq: int, ece_echo: bool, send_time: int) -> Packet:
    return Packet(
        flow_id=flow_id,
        seq=ack_seq,
        payload_len=0,
        wire_len=ACK_WIRE_LEN,
        is_ack=True,
        ect=False,
        ce=False,
        ece_echo=ece_echo,
        send_time=send_time,
    )

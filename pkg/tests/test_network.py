"""Link timing semantics and dumbbell construction."""

import pytest

from buffershare.core import MS, SEC, US, EventLoop
from buffershare.experiment import build_dumbbell
from buffershare.network import (
    ACK_WIRE_LEN,
    DATA_WIRE_LEN,
    DumbbellSpec,
    Link,
    NetworkConditions,
    Packet,
    make_ack_packet,
    make_data_packet,
)
from buffershare.qdisc import SharedBufferConfig
from buffershare.transport import CcKind

GBPS = 10**9


def conditions(**kw):
    defaults = dict(cubic_rtt=50 * MS, dctcp_rtt=200 * US, line_rate=GBPS)
    defaults.update(kw)
    return NetworkConditions(**defaults)


class TestLink:
    def test_serialization_1500B_at_1gbps_is_12us(self):
        link = Link(GBPS, 0)
        pkt = make_data_packet(0, 0, False, 0)
        assert link.transmit(pkt, 0) == 12 * US

    def test_pure_propagation_for_zero_length(self):
        link = Link(GBPS, 50 * US)
        pkt = Packet(0, 0, 0, 0, False, False, False, False, 0)
        assert link.transmit(pkt, 0) == 50 * US

    def test_back_to_back_serialization_chain(self):
        # busy_until chain: second 1500B packet delivered 12us after first.
        link = Link(GBPS, 0)
        first = link.transmit(make_data_packet(0, 0, False, 0), 0)
        second = link.transmit(make_data_packet(0, 1448, False, 0), 0)
        assert second - first == 12 * US

    def test_idle_gap_resets_chain(self):
        link = Link(GBPS, 10 * US)
        link.transmit(make_data_packet(0, 0, False, 0), 0)
        late = link.transmit(make_data_packet(0, 1448, False, 0), 100 * US)
        assert late == 100 * US + 12 * US + 10 * US

    def test_busy_until_never_decreases(self):
        link = Link(GBPS, 0)
        prev = 0
        for at in (0, 5 * US, 3 * US, 50 * US, 10 * US):
            link.transmit(make_data_packet(0, 0, False, 0), at)
            assert link.busy_until >= prev
            prev = link.busy_until

    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ValueError):
            Link(0, 0)


class TestPacketInvariants:
    def test_data_packet_shape(self):
        pkt = make_data_packet(3, 1448, True, 17)
        assert pkt.wire_len >= pkt.payload_len
        assert not pkt.is_ack and pkt.ect and not pkt.ce

    def test_ack_packet_shape(self):
        pkt = make_ack_packet(3, 2896, True, 17)
        assert pkt.is_ack and pkt.payload_len == 0
        assert pkt.wire_len == ACK_WIRE_LEN
        assert pkt.ece_echo


class TestDumbbellSpec:
    def test_rejects_zero_senders(self):
        with pytest.raises(ValueError):
            DumbbellSpec(0, 0, 10, conditions(), SharedBufferConfig())

    def test_single_group_is_valid(self):
        spec = DumbbellSpec(1, 0, 1, conditions(), SharedBufferConfig())
        dumbbell = build_dumbbell(spec, seed=0)
        assert len(dumbbell.flows) == 1
        assert dumbbell.flows[0].group is CcKind.DCTCP


class TestBuildDumbbell:
    def test_paper_scale_flow_counts(self):
        spec = DumbbellSpec(10, 10, 10, conditions(), SharedBufferConfig())
        dumbbell = build_dumbbell(spec, seed=1)
        dctcp = [f for f in dumbbell.flows if f.group is CcKind.DCTCP]
        cubic = [f for f in dumbbell.flows if f.group is CcKind.CUBIC]
        assert len(dctcp) == 100
        assert len(cubic) == 100
        assert len(dumbbell.access_links) == 20

    def test_sender_link_delay_is_half_group_rtt(self):
        spec = DumbbellSpec(1, 1, 1, conditions(cubic_rtt=50 * MS), SharedBufferConfig())
        dumbbell = build_dumbbell(spec, seed=1)
        dctcp_link, cubic_link = dumbbell.access_links
        assert dctcp_link.prop_delay == 100 * US
        assert cubic_link.prop_delay == 25 * MS
        assert dumbbell.bottleneck.prop_delay == 0

    def test_receiver_link_delay_knob(self):
        cond = conditions(receiver_link_delay=50 * US)
        spec = DumbbellSpec(1, 0, 1, cond, SharedBufferConfig())
        dumbbell = build_dumbbell(spec, seed=1)
        assert dumbbell.bottleneck.prop_delay == 50 * US
        assert dumbbell.flows[0].reverse_delay == 100 * US + 50 * US

    def test_flow_starts_jittered_within_window(self):
        spec = DumbbellSpec(5, 5, 4, conditions(), SharedBufferConfig())
        dumbbell = build_dumbbell(spec, seed=3, start_window=SEC)
        starts = [f.start_time for f in dumbbell.flows]
        assert all(0 <= s < SEC for s in starts)
        assert len(set(starts)) > 30  # no forced synchronization

    def test_unloaded_rtt_matches_configured_within_serializations(self):
        # The first ACK of a solo probe flow measures the base path: the
        # configured group RTT plus one serialization on each forward link.
        cond = conditions(dctcp_rtt=200 * US)
        spec = DumbbellSpec(
            1, 0, 1, cond,
            SharedBufferConfig(ecn_threshold=1_800_000),  # never mark
        )
        dumbbell = build_dumbbell(spec, seed=2, start_window=0)
        ser = dumbbell.bottleneck.serialization_ns(DATA_WIRE_LEN)
        dumbbell.engine.post(0, dumbbell.flows[0].sender.start)
        dumbbell.engine.run_until(200 * US + 2 * ser)
        assert dumbbell.flows[0].sender.conn.srtt == 200 * US + 2 * ser


class TestPerLinkFifo:
    def test_packets_delivered_in_transmission_order(self):
        engine = EventLoop()
        link = Link(GBPS, 30 * US)
        deliveries = []
        for i in range(20):
            pkt = make_data_packet(0, i * 1448, False, 0)
            at = engine.now
            t = link.transmit(pkt, i * US)
            deliveries.append(t)
        assert deliveries == sorted(deliveries)

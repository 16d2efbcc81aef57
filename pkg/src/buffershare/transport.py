"""Per-flow TCP machinery: bulk sender, NewReno-style loss recovery, and the
DCTCP / Cubic congestion-control laws.

DCTCP scales its window cut by the EWMA fraction of ECN-marked bytes per
window (gain 1/16); Cubic follows the cubic curve anchored at the pre-loss
window with fast convergence. Both share one send path: cumulative ACKs,
three duplicate ACKs for fast retransmit, and an RTO backstop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from .core import EventLoop, MS, SEC
from .network import DATA_PAYLOAD_LEN, DATA_WIRE_LEN, Packet

MSS = DATA_PAYLOAD_LEN
INITIAL_CWND = 10.0  # MSS
DUP_ACK_THRESHOLD = 3

DCTCP_G = 1.0 / 16.0
DCTCP_INITIAL_ALPHA = 1.0  # conservative start: first marked window halves

CUBIC_C = 0.4  # MSS / s^3
CUBIC_BETA = 0.7

SRTT_GAIN = 1.0 / 8.0
RTTVAR_GAIN = 1.0 / 4.0
RTO_MIN = 1 * MS
RTO_INITIAL = 1 * SEC  # until the first RTT sample
RTO_MAX = 60 * SEC


def rto_floor_for_path(base_rtt: int, capacity: int, line_rate: int) -> int:
    """Smallest safe RTO for a path through a shared buffer.

    Any timer below the worst-case RTT (base RTT plus the time to drain a
    full buffer at line rate) is guaranteed to fire spuriously whenever the
    competing traffic spikes the queue, so the floor is that worst case with
    25% headroom, never below 1 ms.
    """
    worst_rtt = base_rtt + (capacity * 8 * SEC) // line_rate
    return max(RTO_MIN, worst_rtt + worst_rtt // 4)


class CcKind(Enum):
    DCTCP = "dctcp"
    CUBIC = "cubic"


class Phase(Enum):
    SLOW_START = "slow-start"
    AVOIDANCE = "avoidance"
    FAST_RECOVERY = "fast-recovery"
    RTO_RECOVERY = "rto-recovery"


@dataclass
class ConnectionState:
    """Sender state shared by both congestion controls. Windows are kept in
    fractional MSS units; sequence numbers are byte offsets."""

    cc_kind: CcKind
    cwnd: float = INITIAL_CWND
    ssthresh: float = math.inf
    mss: int = MSS
    srtt: int = 0
    rttvar: int = 0
    in_flight: int = 0
    highest_acked: int = 0
    dup_ack_count: int = 0
    phase: Phase = Phase.SLOW_START


@dataclass
class DctcpState:
    alpha: float = DCTCP_INITIAL_ALPHA
    g: float = DCTCP_G
    bytes_acked_epoch: int = 0
    bytes_marked_epoch: int = 0
    epoch_end_seq: int = 0
    ce_cut_done_this_window: bool = False


@dataclass
class CubicState:
    w_max: float = 0.0
    w_max_last: float = 0.0
    epoch_start: Optional[int] = None
    k: float = 0.0  # seconds
    c_scale: float = CUBIC_C
    beta: float = CUBIC_BETA
    w_est: float = 0.0
    reno_friendly: bool = True


def dctcp_update_alpha(alpha: float, f: float, g: float) -> float:
    """One EWMA step of the marked-byte fraction: (1-g)*alpha + g*f."""
    out = (1.0 - g) * alpha + g * f
    return min(1.0, max(0.0, out))


def dctcp_on_epoch_end(
    conn: ConnectionState, d: DctcpState, snd_nxt: int, allow_cut: bool = True
) -> None:
    """Close one window-sized observation epoch.

    Updates alpha from the epoch's marked fraction, applies the proportional
    window cut cwnd*(1 - alpha/2) when any mark was seen (at most one
    reduction per window: ``allow_cut`` is false when a loss already cut
    this window), and opens the next epoch at the current send front.
    """
    acked = d.bytes_acked_epoch
    f = d.bytes_marked_epoch / acked if acked > 0 else 0.0
    d.alpha = dctcp_update_alpha(d.alpha, f, d.g)
    if d.bytes_marked_epoch > 0 and allow_cut:
        conn.cwnd = max(1.0, conn.cwnd * (1.0 - d.alpha / 2.0))
        conn.ssthresh = max(conn.cwnd, 2.0)
        d.ce_cut_done_this_window = True
    else:
        d.ce_cut_done_this_window = False
    d.bytes_acked_epoch = 0
    d.bytes_marked_epoch = 0
    d.epoch_end_seq = snd_nxt


def cubic_k(w_max: float, beta: float, c_scale: float) -> float:
    """Time (seconds) for the cubic to climb back to w_max from beta*w_max."""
    return ((w_max * (1.0 - beta)) / c_scale) ** (1.0 / 3.0)


def cubic_target_window(t_since_epoch: float, cs: CubicState) -> float:
    """The cubic curve W(t) = C*(t - K)^3 + w_max, in MSS units."""
    dt = t_since_epoch - cs.k
    return cs.c_scale * dt * dt * dt + cs.w_max


def cubic_on_loss(cs: CubicState, cwnd: float, now: int) -> float:
    """Loss reaction: fast convergence on w_max, multiplicative decrease,
    and a fresh epoch. Returns the new cwnd."""
    prev_w_max = cs.w_max
    if cwnd < prev_w_max:
        cs.w_max = cwnd * (1.0 + cs.beta) / 2.0
    else:
        cs.w_max = cwnd
    cs.w_max_last = prev_w_max
    new_cwnd = max(1.0, cwnd * cs.beta)
    cs.k = cubic_k(cs.w_max, cs.beta, cs.c_scale)
    cs.epoch_start = now
    cs.w_est = new_cwnd
    return new_cwnd


def cubic_on_ack_avoidance(
    conn: ConnectionState, cs: CubicState, newly_acked: int, now: int
) -> None:
    """Grow cwnd toward the cubic target (or the Reno-friendly estimate)."""
    if cs.epoch_start is None:
        # Entered avoidance without a recorded loss; anchor the curve here.
        cs.epoch_start = now
        cs.w_max = max(cs.w_max, conn.cwnd)
        cs.k = cubic_k(cs.w_max, cs.beta, cs.c_scale)
        cs.w_est = conn.cwnd
    t = (now - cs.epoch_start) / SEC
    srtt = (conn.srtt if conn.srtt > 0 else MS) / SEC
    target = cubic_target_window(t + srtt, cs)
    if cs.reno_friendly:
        cs.w_est = cs.w_max * cs.beta + (3.0 * (1.0 - cs.beta) / (1.0 + cs.beta)) * (t / srtt)
        if cs.w_est > target:
            target = cs.w_est
    # Never shrink on an ACK; cap the per-RTT ramp at 50%.
    target = min(max(target, conn.cwnd), 1.5 * conn.cwnd)
    conn.cwnd += (target - conn.cwnd) / conn.cwnd * (newly_acked / conn.mss)


class FlowSender:
    """Bulk-sending TCP endpoint: keeps floor(cwnd) MSS-sized segments in
    flight at all times (infinite data source, never application-limited).

    ``emit`` hands a data packet to the network; delivery of ACKs comes back
    through :meth:`on_ack`.
    """

    def __init__(
        self,
        engine: EventLoop,
        flow_id: int,
        cc_kind: CcKind,
        emit: Callable[[Packet], None],
        rto_floor: int = RTO_MIN,
    ):
        self.engine = engine
        self.flow_id = flow_id
        self.emit = emit
        self.rto_floor = rto_floor
        self.conn = ConnectionState(cc_kind)
        self.dctcp = DctcpState() if cc_kind is CcKind.DCTCP else None
        self.cubic = CubicState() if cc_kind is CcKind.CUBIC else None
        self.ect = cc_kind is CcKind.DCTCP
        self.snd_nxt = 0
        self.sent_packets = 0
        self.retransmitted_packets = 0
        self.rto_count = 0
        self._send_times: dict[int, int] = {}
        self._recover = 0
        self._rto_backoff = 1
        self._rto_deadline = 0
        self._timer_pending = False
        self._cut_this_window = False

    # -- sending ---------------------------------------------------------

    def start(self) -> None:
        self.maybe_send()

    def maybe_send(self) -> None:
        conn = self.conn
        mss = conn.mss
        limit = int(conn.cwnd) * mss
        emit = self.emit
        now = self.engine.now
        flow_id = self.flow_id
        ect = self.ect
        sent = 0
        seq = self.snd_nxt
        while seq - conn.highest_acked + mss <= limit:
            self._send_times[seq] = now
            emit(Packet(flow_id, seq, mss, DATA_WIRE_LEN, False, ect, False, False, now))
            seq += mss
            sent += 1
        if sent:
            self.snd_nxt = seq
            conn.in_flight = seq - conn.highest_acked
            self.sent_packets += sent
            if not self._timer_pending:
                self._arm_timer(now)

    def _retransmit(self, seq: int) -> None:
        # Karn: a retransmitted segment never yields an RTT sample.
        now = self.engine.now
        self._send_times.pop(seq, None)
        self.retransmitted_packets += 1
        self.sent_packets += 1
        if not self._timer_pending:
            self._arm_timer(now)
        self.emit(Packet(self.flow_id, seq, self.conn.mss, DATA_WIRE_LEN,
                         False, self.ect, False, False, now))

    # -- ACK processing ---------------------------------------------------

    def on_ack(self, ack: Packet) -> None:
        conn = self.conn
        if not ack.is_ack or ack.seq < conn.highest_acked:
            return  # malformed or regressing cumulative ACK
        now = self.engine.now
        if ack.seq == conn.highest_acked:
            if self.snd_nxt == conn.highest_acked:
                return  # nothing outstanding
            conn.dup_ack_count += 1
            if (
                conn.dup_ack_count == DUP_ACK_THRESHOLD
                and conn.phase is not Phase.FAST_RECOVERY
            ):
                self._enter_fast_recovery(now)
            return

        newly = ack.seq - conn.highest_acked
        conn.dup_ack_count = 0
        self._sample_rtt(ack.seq, now)
        if self.dctcp is not None:
            self.dctcp.bytes_acked_epoch += newly
            if ack.ece_echo:
                self.dctcp.bytes_marked_epoch += newly
                if conn.ssthresh > conn.cwnd:
                    conn.ssthresh = conn.cwnd  # congestion seen: leave slow start
        self._forget_segments(conn.highest_acked, ack.seq)
        conn.highest_acked = ack.seq
        conn.in_flight = self.snd_nxt - conn.highest_acked

        if conn.phase is Phase.FAST_RECOVERY:
            if ack.seq >= self._recover:
                conn.cwnd = max(1.0, conn.ssthresh)
                conn.phase = Phase.AVOIDANCE
            else:
                # NewReno partial ACK: retransmit the next hole, stay in
                # recovery, no further window reduction this episode.
                self._retransmit(conn.highest_acked)
        else:
            if conn.phase is Phase.RTO_RECOVERY:
                self._rto_backoff = 1
                conn.phase = Phase.SLOW_START
            self._grow_window(newly, now)

        if self.dctcp is not None and conn.highest_acked >= self.dctcp.epoch_end_seq:
            allow = not self._cut_this_window and conn.phase in (
                Phase.SLOW_START,
                Phase.AVOIDANCE,
            )
            dctcp_on_epoch_end(conn, self.dctcp, self.snd_nxt, allow_cut=allow)
            if self.dctcp.ce_cut_done_this_window:
                conn.phase = Phase.AVOIDANCE
            self._cut_this_window = False

        if self.snd_nxt > conn.highest_acked:
            self._rto_deadline = now + self._current_rto()
        self.maybe_send()

    def _grow_window(self, newly_acked: int, now: int) -> None:
        conn = self.conn
        if conn.cwnd < conn.ssthresh:
            conn.phase = Phase.SLOW_START
            conn.cwnd += newly_acked / conn.mss
            return
        conn.phase = Phase.AVOIDANCE
        if self.cubic is not None:
            cubic_on_ack_avoidance(conn, self.cubic, newly_acked, now)
        else:
            conn.cwnd += (newly_acked / conn.mss) / conn.cwnd

    def _enter_fast_recovery(self, now: int) -> None:
        conn = self.conn
        self._recover = self.snd_nxt
        conn.phase = Phase.FAST_RECOVERY
        if self.cubic is not None:
            conn.cwnd = cubic_on_loss(self.cubic, conn.cwnd, now)
            conn.ssthresh = conn.cwnd
        else:
            conn.ssthresh = max(conn.cwnd / 2.0, 2.0)
            conn.cwnd = conn.ssthresh
        self._cut_this_window = True
        self._retransmit(conn.highest_acked)

    # -- timers and RTO ----------------------------------------------------

    def _current_rto(self) -> int:
        if self.conn.srtt > 0:
            base = max(self.rto_floor, self.conn.srtt + 4 * self.conn.rttvar)
        else:
            base = RTO_INITIAL
        return min(base * self._rto_backoff, RTO_MAX)

    def _arm_timer(self, now: int) -> None:
        self._rto_deadline = now + self._current_rto()
        self._timer_pending = True
        self.engine.post(self._rto_deadline, self._timer_fire)

    def _timer_fire(self) -> None:
        self._timer_pending = False
        now = self.engine.now
        if self.snd_nxt == self.conn.highest_acked:
            return  # idle; re-armed by the next send
        if now < self._rto_deadline:
            # ACK progress moved the deadline; sleep until the live one.
            self._timer_pending = True
            self.engine.post(self._rto_deadline, self._timer_fire)
            return
        self._on_rto(now)

    def _on_rto(self, now: int) -> None:
        conn = self.conn
        self.rto_count += 1
        conn.ssthresh = max(conn.cwnd / 2.0, 2.0)
        if self.cubic is not None:
            cubic_on_loss(self.cubic, conn.cwnd, now)  # w_max/epoch bookkeeping
        conn.cwnd = 1.0
        conn.phase = Phase.RTO_RECOVERY
        conn.dup_ack_count = 0
        self._recover = self.snd_nxt
        self._cut_this_window = True
        if self.dctcp is not None:
            self.dctcp.bytes_acked_epoch = 0
            self.dctcp.bytes_marked_epoch = 0
            self.dctcp.epoch_end_seq = self.snd_nxt
        self._rto_backoff = min(self._rto_backoff * 2, 64)
        self._retransmit(conn.highest_acked)
        self._rto_deadline = now + self._current_rto()
        if not self._timer_pending:
            self._timer_pending = True
            self.engine.post(self._rto_deadline, self._timer_fire)

    # -- RTT estimation ----------------------------------------------------

    def _sample_rtt(self, acked_to: int, now: int) -> None:
        sent = self._send_times.get(acked_to - self.conn.mss)
        if sent is None:
            return
        sample = now - sent
        conn = self.conn
        if conn.srtt == 0:
            conn.srtt = sample
            conn.rttvar = sample // 2
        else:
            conn.rttvar = int((1 - RTTVAR_GAIN) * conn.rttvar + RTTVAR_GAIN * abs(conn.srtt - sample))
            conn.srtt = int((1 - SRTT_GAIN) * conn.srtt + SRTT_GAIN * sample)

    def _forget_segments(self, lo: int, hi: int) -> None:
        mss = self.conn.mss
        pop = self._send_times.pop
        while lo < hi:
            pop(lo, None)
            lo += mss


@dataclass
class FlowReceiverState:
    """Receiver side of one flow: cumulative delivery plus an out-of-order
    buffer. ``unique_bytes`` is the goodput (retransmissions excluded)."""

    rcv_nxt: int = 0
    unique_bytes: int = 0
    ooo: set = field(default_factory=set)

    def on_data(self, pkt: Packet) -> int:
        """Absorb one data segment; return the new cumulative ACK offset."""
        if pkt.seq == self.rcv_nxt:
            self.rcv_nxt += pkt.payload_len
            self.unique_bytes += pkt.payload_len
            while self.rcv_nxt in self.ooo:
                self.ooo.discard(self.rcv_nxt)
                self.rcv_nxt += pkt.payload_len
                self.unique_bytes += pkt.payload_len
        elif pkt.seq > self.rcv_nxt:
            self.ooo.add(pkt.seq)
        return self.rcv_nxt


__all__ = [
    "MSS",
    "INITIAL_CWND",
    "DUP_ACK_THRESHOLD",
    "DCTCP_G",
    "CUBIC_C",
    "CUBIC_BETA",
    "CcKind",
    "Phase",
    "ConnectionState",
    "DctcpState",
    "CubicState",
    "dctcp_update_alpha",
    "dctcp_on_epoch_end",
    "cubic_k",
    "cubic_target_window",
    "cubic_on_loss",
    "cubic_on_ack_avoidance",
    "FlowSender",
    "FlowReceiverState",
]

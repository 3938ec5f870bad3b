"""AP and STA state machines for the two-round MU-MIMO MAC.

The machines are deterministic step functions driven by channel events
(idle slots, frame ends, timer expirations).  The event kernel in
``sim`` owns the clock and channel arbitration; the step functions own
every protocol decision: when to answer, when to join the second
contention round, when to release the group CTS, and how backoff is
renewed after a cycle.

Times handed to and returned by step functions are integer nanoseconds.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from . import timing as tm
from .config import SimConfig
from .frames import Frame, FrameKind, make_ant_cts, make_g_cts, make_mu_rts

AP_ID = 0


def us_to_ns(us: float) -> int:
    return round(us * 1000)


class StaPhase(Enum):
    IDLE = "idle"
    CONTEND1 = "contend1"
    AWAIT_ANT_CTS = "await-ant-cts"
    CONTEND2 = "contend2"
    AWAIT_G_CTS = "await-g-cts"
    TRANSMITTING = "transmitting"
    AWAIT_G_ACK = "await-g-ack"
    AWAIT_MU_CTS = "await-mu-cts"   # downlink receiver role
    NAV = "nav"


class ApPhase(Enum):
    IDLE = "idle"
    CONTEND1 = "contend1"
    DL_AWAIT_CTS = "dl-await-cts"
    DL_TRANSMITTING = "dl-transmitting"
    DL_AWAIT_ACK = "dl-await-ack"
    UL_ROUND2 = "ul-round2"
    UL_RECEIVING = "ul-receiving"


class EventKind(Enum):
    IDLE_SLOTS = "idle-slots"
    FRAME_START = "frame-start"
    FRAME_END = "frame-end"
    TIMER_EXPIRED = "timer-expired"


@dataclass(frozen=True)
class ChannelEvent:
    kind: EventKind
    time: int                      # ns
    frame: Frame | None = None
    collided: bool = False
    timer: str | None = None
    n_slots: int = 1


@dataclass(frozen=True)
class Transmit:
    frame: Frame
    start: int                     # ns


@dataclass(frozen=True)
class SetTimer:
    name: str
    expires: int                   # ns


@dataclass(frozen=True)
class CancelTimer:
    name: str


Action = Transmit | SetTimer | CancelTimer


class ProtocolTiming:
    """All protocol durations precomputed as integer nanoseconds."""

    def __init__(self, cfg: SimConfig):
        mcs, lengths, ifs = cfg.mcs, cfg.lengths, cfg.ifs
        n = cfg.n_antennas
        self.sifs = us_to_ns(ifs.sifs)
        self.mu_sifs = us_to_ns(ifs.mu_sifs)
        self.aifs = us_to_ns(ifs.aifs)
        self.idle_slot = us_to_ns(ifs.idle_slot)
        # Control frames occupy a single spatial stream; the MU-RTS
        # carries one training field per AP antenna.
        self.t_rts = us_to_ns(tm.frame_airtime(lengths.l_rts, 1, mcs, lengths))
        self.t_mu_rts = us_to_ns(tm.frame_airtime(lengths.l_mu_rts, n, mcs, lengths))
        self.t_mu_cts = us_to_ns(tm.frame_airtime(lengths.l_mu_cts, 1, mcs, lengths))
        self.t_mu_ack = us_to_ns(tm.frame_airtime(lengths.l_mu_ack, 1, mcs, lengths))
        self.t_ant_cts = us_to_ns(tm.frame_airtime(lengths.l_ant_cts, 1, mcs, lengths))
        self.t_g_cts = us_to_ns(tm.frame_airtime(lengths.l_g_cts, 1, mcs, lengths))
        self.t_g_ack = us_to_ns(tm.frame_airtime(lengths.l_g_ack, 1, mcs, lengths))
        self.slot2 = self.mu_sifs + self.t_rts
        timers = tm.compute_timers(n, cfg.cw_2nd, ifs, mcs, lengths)
        self.cts_timer = us_to_ns(timers.cts_timer)
        self.eifs = us_to_ns(timers.eifs)
        self.mu_cts_timer = us_to_ns(timers.mu_cts_timer)
        self.mu_eifs = us_to_ns(timers.mu_eifs)
        self.g_cts_timer = us_to_ns(timers.g_cts_timer)
        # one parallel control-reply slot (LI-MAC collision recovery)
        self.li_cts_timer = self.sifs + self.t_mu_cts
        self._mcs, self._lengths = mcs, lengths
        self._ampdu_cache: dict[tuple[int, int], int] = {}

    def ampdu(self, n_frames: int, n_streams: int) -> int:
        key = (n_frames, n_streams)
        ns = self._ampdu_cache.get(key)
        if ns is None:
            ns = us_to_ns(tm.ampdu_airtime(n_frames, n_streams,
                                           self._mcs, self._lengths))
            self._ampdu_cache[key] = ns
        return ns


@dataclass
class ProtocolContext:
    timing: ProtocolTiming
    cw: int
    cw_2nd: int
    n_antennas: int
    nf_sta: int


@dataclass
class StaState:
    node_id: int
    backoff_1st: int = 0
    backoff_2nd: int | None = None
    phase: StaPhase = StaPhase.IDLE
    frozen: bool = False
    initiator: bool = False
    queue: deque = field(default_factory=deque)   # arrival times, ns
    pending_nf: int = 0
    # reusable immutable frames (identical every transmission)
    rts_frame: Frame | None = None
    mu_cts_frame: Frame | None = None
    mu_ack_frame: Frame | None = None


@dataclass
class ApState:
    n_antennas: int
    node_id: int = AP_ID
    available_antennas: int = 0
    round2_winners: list[int] = field(default_factory=list)
    round2_deadline: int | None = None
    backoff_1st: int = 0
    phase: ApPhase = ApPhase.IDLE
    queue: deque = field(default_factory=deque)   # (dest, arrival ns)
    initiator: bool = False
    # in-flight sequence bookkeeping
    downlink_plan: list[tuple[int, list[int]]] = field(default_factory=list)
    expected_replies: int = 0
    data_end: int = 0


def draw_backoff(cw: int, rng: random.Random) -> int:
    return rng.randrange(cw)


def renew_backoff(state, outcome: str, cw: int, rng: random.Random):
    """First-round backoff renewal after a finished cycle.

    Initiators and collision participants draw a fresh counter; joiners
    and losers resume the frozen one.
    """
    if outcome in ("initiator-success", "collision"):
        state.backoff_1st = draw_backoff(cw, rng)
        state.frozen = False
    else:  # joiner-success, loser
        state.frozen = True
    state.initiator = False
    return state


def on_collision(state, role: str, ctx: ProtocolContext) -> int:
    """Wait (ns) a node observes after a first-round collision.

    Senders cannot tell whether the AP was involved, so they always arm
    the MU-CTS timer; listeners defer for MU-EIFS before resuming their
    countdown.
    """
    if role in ("ap-sender", "sta-sender"):
        return ctx.timing.mu_cts_timer
    if role == "listener":
        return ctx.timing.mu_eifs
    raise ValueError(f"unknown collision role: {role}")


def select_downlink_targets(queue: deque, n_antennas: int,
                            nf_cap: int) -> list[tuple[int, list[int]]]:
    """Pick up to n distinct head-of-line destinations and pull their frames.

    Returns (dest, arrival-times) pairs in selection order and removes
    the taken frames from the queue.
    """
    order: list[int] = []
    seen: set[int] = set()
    for dest, _ in queue:
        if dest not in seen:
            seen.add(dest)
            order.append(dest)
            if len(order) == n_antennas:
                break
    taken: dict[int, list[int]] = {d: [] for d in order}
    rest = []
    for dest, arrival in queue:
        bucket = taken.get(dest)
        if bucket is not None and len(bucket) < nf_cap:
            bucket.append(arrival)
        else:
            rest.append((dest, arrival))
    queue.clear()
    queue.extend(rest)
    return [(d, taken[d]) for d in order]


def sta_frames(state: StaState, t: ProtocolTiming) -> None:
    """Build the station's reusable control frames once."""
    state.rts_frame = Frame(FrameKind.RTS, tx=state.node_id,
                            airtime=t.t_rts / 1000)
    state.mu_cts_frame = Frame(FrameKind.MU_CTS, tx=state.node_id,
                               group=(AP_ID,), airtime=t.t_mu_cts / 1000)
    state.mu_ack_frame = Frame(FrameKind.MU_ACK, tx=state.node_id,
                               group=(AP_ID,), airtime=t.t_mu_ack / 1000)


def sta_step(state: StaState, ev: ChannelEvent, ctx: ProtocolContext,
             rng: random.Random) -> list[Action]:
    t = ctx.timing
    if state.rts_frame is None:
        sta_frames(state, t)

    if ev.kind is EventKind.IDLE_SLOTS:
        if state.phase is not StaPhase.CONTEND1 or not state.queue:
            return []
        if ev.n_slots > state.backoff_1st:
            raise RuntimeError("idle slots overran the backoff counter")
        state.backoff_1st -= ev.n_slots
        if state.backoff_1st == 0:
            state.phase = StaPhase.AWAIT_ANT_CTS
            state.initiator = True
            return [Transmit(state.rts_frame, ev.time)]
        return []

    if ev.kind is EventKind.FRAME_END:
        f = ev.frame
        if ev.collided:
            # own second-round RTS lost: out of this round for good
            if state.phase is StaPhase.CONTEND2 and f.tx == state.node_id:
                state.phase = StaPhase.NAV
                state.backoff_2nd = None
            return []

        if f.kind is FrameKind.ANT_CTS:
            if state.initiator:
                state.phase = StaPhase.AWAIT_G_CTS
                return []
            if state.queue:
                state.backoff_2nd = rng.randrange(ctx.cw_2nd)
                state.phase = StaPhase.CONTEND2
                start = (ev.time + state.backoff_2nd * t.slot2 + t.mu_sifs)
                return [Transmit(state.rts_frame, start)]
            state.phase = StaPhase.NAV
            return []

        if f.kind is FrameKind.G_CTS:
            if state.node_id in f.group:
                nf = min(len(state.queue), ctx.nf_sta)
                state.pending_nf = nf
                state.phase = StaPhase.TRANSMITTING
                air = t.ampdu(nf, ctx.n_antennas)
                data = Frame(FrameKind.AMPDU, tx=state.node_id, group=(AP_ID,),
                             n_subframes=nf, airtime=air / 1000)
                return [Transmit(data, ev.time + t.sifs)]
            state.phase = StaPhase.NAV
            state.backoff_2nd = None
            return []

        if f.kind is FrameKind.G_ACK:
            if state.node_id in f.group:
                state.phase = StaPhase.CONTEND1 if state.queue else StaPhase.IDLE
            return []

        if f.kind is FrameKind.MU_RTS:
            if state.node_id in f.group:
                pos = f.group.index(state.node_id)
                state.phase = StaPhase.AWAIT_MU_CTS
                return [Transmit(state.mu_cts_frame, ev.time + t.sifs
                                 + pos * (t.t_mu_cts + t.sifs))]
            state.phase = StaPhase.NAV
            return []

        if f.kind is FrameKind.AMPDU and f.tx == AP_ID:
            if state.node_id in f.group:
                return [Transmit(state.mu_ack_frame, ev.time + t.sifs)]
            return []

        return []

    if ev.kind is EventKind.TIMER_EXPIRED:
        return []

    raise ValueError(f"unhandled event kind {ev.kind}")


def ap_step(state: ApState, ev: ChannelEvent, ctx: ProtocolContext,
            rng: random.Random, nf_cap: int) -> list[Action]:
    t = ctx.timing

    if ev.kind is EventKind.IDLE_SLOTS:
        if state.phase is not ApPhase.CONTEND1 or not state.queue:
            return []
        if ev.n_slots > state.backoff_1st:
            raise RuntimeError("idle slots overran the backoff counter")
        state.backoff_1st -= ev.n_slots
        if state.backoff_1st == 0:
            state.downlink_plan = select_downlink_targets(
                state.queue, ctx.n_antennas, nf_cap)
            targets = [d for d, _ in state.downlink_plan]
            state.expected_replies = len(targets)
            state.phase = ApPhase.DL_AWAIT_CTS
            state.initiator = True
            mu_rts = make_mu_rts(AP_ID, targets, t.t_mu_rts / 1000)
            return [Transmit(mu_rts, ev.time)]
        return []

    if ev.kind is EventKind.FRAME_END:
        f = ev.frame
        if ev.collided:
            return []

        if f.kind is FrameKind.RTS:
            if state.phase in (ApPhase.CONTEND1, ApPhase.IDLE):
                # first-round uplink winner
                state.round2_winners = [f.tx]
                if ctx.n_antennas == 1:
                    state.available_antennas = 0
                    state.phase = ApPhase.UL_RECEIVING
                    state.expected_replies = 1
                    g_cts = make_g_cts(AP_ID, [f.tx], t.t_g_cts / 1000)
                    return [Transmit(g_cts, ev.time + t.sifs)]
                state.available_antennas = ctx.n_antennas - 1
                state.phase = ApPhase.UL_ROUND2
                ant_end = ev.time + t.sifs + t.t_ant_cts
                state.round2_deadline = ant_end + t.g_cts_timer
                ant = make_ant_cts(AP_ID, state.available_antennas,
                                   t.t_ant_cts / 1000)
                return [Transmit(ant, ev.time + t.sifs),
                        SetTimer("g_cts", state.round2_deadline)]
            if state.phase is ApPhase.UL_ROUND2:
                state.round2_winners.append(f.tx)
                state.available_antennas -= 1
                if state.available_antennas == 0:
                    state.phase = ApPhase.UL_RECEIVING
                    state.expected_replies = len(state.round2_winners)
                    g_cts = make_g_cts(AP_ID, state.round2_winners,
                                       t.t_g_cts / 1000)
                    return [CancelTimer("g_cts"),
                            Transmit(g_cts, ev.time + t.sifs)]
            return []

        if f.kind is FrameKind.G_CTS and f.tx == AP_ID:
            # own transmission completed; wait for the parallel data
            state.expected_replies = len(f.group)
            state.data_end = 0
            return []

        if (f.kind is FrameKind.AMPDU and f.tx != AP_ID
                and state.phase is ApPhase.UL_RECEIVING):
            state.data_end = max(state.data_end, ev.time)
            state.expected_replies -= 1
            if state.expected_replies == 0:
                g_ack = Frame(FrameKind.G_ACK, tx=AP_ID,
                              group=tuple(state.round2_winners),
                              airtime=t.t_g_ack / 1000)
                return [Transmit(g_ack, state.data_end + t.sifs)]
            return []

        if f.kind is FrameKind.MU_CTS:
            if state.phase is ApPhase.DL_AWAIT_CTS:
                state.expected_replies -= 1
                if state.expected_replies == 0:
                    nf_max = max(len(a) for _, a in state.downlink_plan)
                    air = t.ampdu(nf_max, ctx.n_antennas)
                    targets = tuple(d for d, _ in state.downlink_plan)
                    data = Frame(FrameKind.AMPDU, tx=AP_ID, group=targets,
                                 n_subframes=nf_max, airtime=air / 1000)
                    state.phase = ApPhase.DL_TRANSMITTING
                    state.expected_replies = len(targets)
                    return [Transmit(data, ev.time + t.sifs)]
            return []

        if f.kind is FrameKind.AMPDU and f.tx == AP_ID:
            state.phase = ApPhase.DL_AWAIT_ACK
            return []

        if f.kind is FrameKind.MU_ACK:
            if state.phase is ApPhase.DL_AWAIT_ACK:
                state.expected_replies -= 1
            return []

        return []

    if ev.kind is EventKind.TIMER_EXPIRED:
        if ev.timer == "g_cts" and state.phase is ApPhase.UL_ROUND2:
            state.phase = ApPhase.UL_RECEIVING
            state.expected_replies = len(state.round2_winners)
            g_cts = make_g_cts(AP_ID, state.round2_winners, t.t_g_cts / 1000)
            return [Transmit(g_cts, ev.time + t.sifs)]
        return []

    raise ValueError(f"unhandled event kind {ev.kind}")

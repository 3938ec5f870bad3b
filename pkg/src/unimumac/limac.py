"""Comparison scheme: multi-packet downlink with parallel control replies
and plain one-round single-packet DCF in the uplink.

The downlink keeps the MU-RTS / MU-CTS / A-MPDU / MU-ACK exchange, but
all control replies are received simultaneously (one reply slot instead
of N sequential ones).  The uplink is a standard RTS/CTS/DATA/ACK
single-user exchange; there is no antenna announcement and no second
contention round.  With ``single_user=True`` the downlink degrades to a
one-target, one-frame exchange (the baseline DCF scheme).
"""

from __future__ import annotations

import random

from .frames import Frame, FrameKind, make_mu_rts
from .protocol import (AP_ID, Action, ApPhase, ApState, ChannelEvent,
                       EventKind, ProtocolContext, StaPhase, StaState,
                       Transmit, select_downlink_targets, sta_frames)


def limac_sta_step(state: StaState, ev: ChannelEvent, ctx: ProtocolContext,
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
            state.phase = StaPhase.AWAIT_ANT_CTS   # awaiting the CTS reply
            state.initiator = True
            return [Transmit(state.rts_frame, ev.time)]
        return []

    if ev.kind is EventKind.FRAME_END:
        f = ev.frame
        if ev.collided:
            return []

        if f.kind is FrameKind.MU_CTS and f.tx == AP_ID:
            if state.initiator and state.node_id in f.group:
                state.pending_nf = 1
                state.phase = StaPhase.TRANSMITTING
                air = t.ampdu(1, 1)
                data = Frame(FrameKind.AMPDU, tx=state.node_id, group=(AP_ID,),
                             n_subframes=1, airtime=air / 1000)
                return [Transmit(data, ev.time + t.sifs)]
            state.phase = StaPhase.NAV
            return []

        if f.kind is FrameKind.MU_RTS:
            if state.node_id in f.group:
                # every listed station answers in the same reply slot
                state.phase = StaPhase.AWAIT_MU_CTS
                return [Transmit(state.mu_cts_frame, ev.time + t.sifs)]
            state.phase = StaPhase.NAV
            return []

        if f.kind is FrameKind.AMPDU and f.tx == AP_ID:
            if state.node_id in f.group:
                return [Transmit(state.mu_ack_frame, ev.time + t.sifs)]
            return []

        if f.kind is FrameKind.MU_ACK and f.tx == AP_ID:
            if state.node_id in f.group:
                state.phase = (StaPhase.CONTEND1 if state.queue
                               else StaPhase.IDLE)
            return []

        return []

    if ev.kind is EventKind.TIMER_EXPIRED:
        return []

    raise ValueError(f"unhandled event kind {ev.kind}")


def limac_ap_step(state: ApState, ev: ChannelEvent, ctx: ProtocolContext,
                  rng: random.Random, nf_cap: int,
                  single_user: bool = False) -> list[Action]:
    t = ctx.timing
    n_targets = 1 if single_user else ctx.n_antennas
    n_streams = 1 if single_user else ctx.n_antennas

    if ev.kind is EventKind.IDLE_SLOTS:
        if state.phase is not ApPhase.CONTEND1 or not state.queue:
            return []
        if ev.n_slots > state.backoff_1st:
            raise RuntimeError("idle slots overran the backoff counter")
        state.backoff_1st -= ev.n_slots
        if state.backoff_1st == 0:
            cap = 1 if single_user else nf_cap
            state.downlink_plan = select_downlink_targets(
                state.queue, n_targets, cap)
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

        if f.kind is FrameKind.RTS and state.phase in (ApPhase.CONTEND1,
                                                       ApPhase.IDLE):
            state.round2_winners = [f.tx]
            state.phase = ApPhase.UL_RECEIVING
            state.expected_replies = 1
            cts = Frame(FrameKind.MU_CTS, tx=AP_ID, group=(f.tx,),
                        airtime=t.t_mu_cts / 1000)
            return [Transmit(cts, ev.time + t.sifs)]

        if (f.kind is FrameKind.AMPDU and f.tx != AP_ID
                and state.phase is ApPhase.UL_RECEIVING):
            ack = Frame(FrameKind.MU_ACK, tx=AP_ID, group=(f.tx,),
                        airtime=t.t_mu_ack / 1000)
            return [Transmit(ack, ev.time + t.sifs)]

        if f.kind is FrameKind.MU_CTS and f.tx != AP_ID:
            if state.phase is ApPhase.DL_AWAIT_CTS:
                state.expected_replies -= 1
                if state.expected_replies == 0:
                    nf_max = max(len(a) for _, a in state.downlink_plan)
                    air = t.ampdu(nf_max, n_streams)
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

        if f.kind is FrameKind.MU_ACK and f.tx != AP_ID:
            if state.phase is ApPhase.DL_AWAIT_ACK:
                state.expected_replies -= 1
            return []

        return []

    if ev.kind is EventKind.TIMER_EXPIRED:
        return []

    raise ValueError(f"unhandled event kind {ev.kind}")

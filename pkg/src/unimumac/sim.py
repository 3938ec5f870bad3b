"""Event-driven simulation kernel.

Owns the global clock, the shared-channel arbitration (simultaneous
first-round request frames collide), traffic generation, queues and the
metric counters.  All protocol decisions are delegated to the state
machines in ``protocol`` / ``limac``; the kernel advances idle slots in
bulk (nothing observable happens inside an idle run), plays scheduled
transmissions in time order and routes frame-end events to the nodes
that can hear and decode them.

The clock is an integer nanosecond counter; identical (config, seed)
pairs replay byte-identical metrics and traces.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field

from .config import Scheme, SimConfig, Traffic
from . import limac as li
from .protocol import (AP_ID, ApPhase, ApState, CancelTimer, ChannelEvent,
                       EventKind, ProtocolContext, ProtocolTiming, SetTimer,
                       StaPhase, StaState, Transmit, ap_step, draw_backoff,
                       renew_backoff, sta_step, us_to_ns)
from .frames import Frame, FrameKind


@dataclass
class Metrics:
    """Per-run counters.  Delays are summed in integer nanoseconds."""

    m_stas: int = 0
    bits_down: int = 0
    bits_up: int = 0
    delay_sum_ap: int = 0
    delay_sum_sta: int = 0
    delivered_ap: int = 0
    delivered_sta: int = 0
    r1_attempts_ap: int = 0
    r1_collisions_ap: int = 0
    r1_attempts_sta: int = 0
    r1_collisions_sta: int = 0
    r2_attempts: int = 0
    r2_collisions: int = 0
    drops: int = 0
    generated_ap: int = 0
    generated_sta: int = 0
    queued_end: int = 0
    slots: int = 0                 # channel slots: idle slots + busy events
    sim_time_ns: int = 0
    per_sta_delay_sum: list = field(default_factory=list)
    per_sta_delivered: list = field(default_factory=list)

    def reset_counters(self):
        self.bits_down = self.bits_up = 0
        self.delay_sum_ap = self.delay_sum_sta = 0
        self.delivered_ap = self.delivered_sta = 0
        self.r1_attempts_ap = self.r1_collisions_ap = 0
        self.r1_attempts_sta = self.r1_collisions_sta = 0
        self.r2_attempts = self.r2_collisions = 0
        self.drops = 0
        self.generated_ap = self.generated_sta = 0
        self.slots = 0
        self.per_sta_delay_sum = [0] * self.m_stas
        self.per_sta_delivered = [0] * self.m_stas


def gen_traffic(kind: Traffic, rng: random.Random, load_bits_s: float = 0.0,
                frame_bits: int = 8000, now: float = 0.0):
    """Arrival-time stream in us for one traffic source.

    Poisson sources draw exponential inter-arrivals with mean
    frame_bits/load; saturated sources have no arrival process (queues
    are refilled on dequeue) so the stream is empty.
    """
    if kind is Traffic.SATURATED or load_bits_s <= 0:
        return iter(())

    def arrivals():
        mean_us = frame_bits / load_bits_s * 1e6
        t = now
        while True:
            t += rng.expovariate(1.0 / mean_us)
            yield t

    return arrivals()


class Simulator:
    def __init__(self, cfg: SimConfig, trace=None):
        cfg.validate()
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.pt = ProtocolTiming(cfg)
        self.ctx = ProtocolContext(self.pt, cfg.cw, cfg.cw_2nd,
                                   cfg.n_antennas, cfg.nf_sta)
        self.horizon = us_to_ns(cfg.horizon_us)
        self.warmup = int(self.horizon * cfg.warmup_frac)
        self.trace = trace
        self.frame_bits = cfg.lengths.l_data

        self.ap = ApState(n_antennas=cfg.n_antennas)
        self.stas = [StaState(node_id=i) for i in range(1, cfg.m_stas + 1)]
        self.metrics = Metrics(m_stas=cfg.m_stas)
        self.metrics.reset_counters()

        self.saturated = cfg.traffic is Traffic.SATURATED
        self.arrivals: list[tuple[int, int]] = []   # (time ns, source id)
        if self.saturated:
            self._refill_sta_queues(0)
            self._refill_ap_queue(0)
        else:
            for src in range(0, cfg.m_stas + 1):
                load = cfg.ap_load if src == AP_ID else cfg.sta_load
                if load > 0:
                    heapq.heappush(self.arrivals,
                                   (self._next_interval(load), src))

        for sta in self.stas:
            sta.backoff_1st = draw_backoff(cfg.cw, self.rng)
            sta.phase = StaPhase.CONTEND1 if sta.queue else StaPhase.IDLE
        self.ap.backoff_1st = draw_backoff(cfg.cw, self.rng)
        self.ap.phase = ApPhase.CONTEND1 if self.ap.queue else ApPhase.IDLE

        if cfg.scheme is Scheme.UNI_MUMAC:
            self._sta_step = sta_step
            self._ap_step = lambda st, ev: ap_step(st, ev, self.ctx, self.rng,
                                                   cfg.nf_ap_eff)
            self.recovery = self.pt.mu_cts_timer
        else:
            single = cfg.scheme is Scheme.BASELINE
            self._sta_step = li.limac_sta_step
            self._ap_step = lambda st, ev: li.limac_ap_step(
                st, ev, self.ctx, self.rng, cfg.nf_ap_eff, single_user=single)
            self.recovery = self.pt.li_cts_timer

    # -- traffic ---------------------------------------------------------

    def _next_interval(self, load_bits_s: float) -> int:
        mean_ns = self.frame_bits / load_bits_s * 1e9
        return round(self.rng.expovariate(1.0 / mean_ns))

    def _refill_sta_queues(self, now: int, only=None):
        for sta in (only if only is not None else self.stas):
            added = self.cfg.q_sta - len(sta.queue)
            for _ in range(added):
                sta.queue.append(now)
            self.metrics.generated_sta += added

    def _refill_ap_queue(self, now: int):
        added = self.cfg.q_ap_eff - len(self.ap.queue)
        for _ in range(added):
            dest = self.rng.randrange(1, self.cfg.m_stas + 1)
            self.ap.queue.append((dest, now))
        self.metrics.generated_ap += added

    def _process_arrivals(self, until: int):
        arrivals = self.arrivals
        while arrivals and arrivals[0][0] <= until:
            at, src = heapq.heappop(arrivals)
            if src == AP_ID:
                self.metrics.generated_ap += 1
                if len(self.ap.queue) < self.cfg.q_ap_eff:
                    dest = self.rng.randrange(1, self.cfg.m_stas + 1)
                    self.ap.queue.append((dest, at))
                    if self.ap.phase is ApPhase.IDLE:
                        self.ap.phase = ApPhase.CONTEND1
                else:
                    self.metrics.drops += 1
                load = self.cfg.ap_load
            else:
                sta = self.stas[src - 1]
                self.metrics.generated_sta += 1
                if len(sta.queue) < self.cfg.q_sta:
                    sta.queue.append(at)
                    if sta.phase is StaPhase.IDLE:
                        sta.phase = StaPhase.CONTEND1
                else:
                    self.metrics.drops += 1
                load = self.cfg.sta_load
            heapq.heappush(arrivals, (at + self._next_interval(load), src))

    # -- trace -----------------------------------------------------------

    def _trace_tx(self, end_ns: int, node: int, kind: FrameKind, outcome: str):
        if self.trace is not None:
            self.trace(f"t_ns={end_ns} node={node} ev=frame_end "
                       f"frame={kind.value} outcome={outcome}\n")

    # -- main loop -------------------------------------------------------

    def run(self) -> Metrics:
        t = 0
        measured_from = 0
        warm = self.warmup == 0
        while t < self.horizon:
            if not warm and t >= self.warmup:
                self.metrics.reset_counters()
                measured_from = t
                warm = True
            nxt = self._cycle(t)
            if nxt is None:               # traffic exhausted, idle forever
                t = self.horizon
                break
            t = nxt
        self.metrics.sim_time_ns = t - measured_from
        self.metrics.queued_end = (len(self.ap.queue)
                                   + sum(len(s.queue) for s in self.stas))
        return self.metrics

    def _contenders(self):
        out = [s for s in self.stas
               if s.phase is StaPhase.CONTEND1 and s.queue]
        if self.ap.phase is ApPhase.CONTEND1 and self.ap.queue:
            out.append(self.ap)
        return out

    def _cycle(self, t: int):
        pt = self.pt
        slot = pt.idle_slot
        aifs_done = t + pt.aifs
        self._process_arrivals(aifs_done)

        while True:
            contenders = self._contenders()
            if not contenders:
                if not self.arrivals:
                    return None
                ta = self.arrivals[0][0]
                if ta >= self.horizon:
                    return None
                aifs_done = max(aifs_done, ta + pt.aifs)
                self._process_arrivals(aifs_done)
                continue
            d = min(c.backoff_1st for c in contenders)
            fire = aifs_done + d * slot
            if self.arrivals and self.arrivals[0][0] < fire:
                ta = self.arrivals[0][0]
                k = (ta - aifs_done) // slot
                if k > 0:
                    for c in contenders:
                        c.backoff_1st -= k
                    self.metrics.slots += k
                    aifs_done += k * slot
                self._process_arrivals(ta)
                continue
            break

        winners = [c for c in contenders if c.backoff_1st == d]
        self.metrics.slots += d + 1
        actions = []
        for w in winners:
            ev = ChannelEvent(EventKind.IDLE_SLOTS, fire, n_slots=d)
            if w is self.ap:
                actions.extend(self._ap_step(w, ev))
            else:
                actions.extend(self._sta_step(w, ev, self.ctx, self.rng))
        for c in contenders:
            if c not in winners:
                c.backoff_1st -= d

        m = self.metrics
        for w in winners:
            if w is self.ap:
                m.r1_attempts_ap += 1
            else:
                m.r1_attempts_sta += 1

        if len(winners) > 1:
            # first-round collision: colliders cannot be told apart, so
            # the channel is assumed busy for the longest request frame
            end = fire + pt.t_mu_rts
            for w in winners:
                if w is self.ap:
                    m.r1_collisions_ap += 1
                    kind = FrameKind.MU_RTS
                else:
                    m.r1_collisions_sta += 1
                    kind = FrameKind.RTS
                self._trace_tx(end, w.node_id, kind, "collided")
                renew_backoff(w, "collision", self.cfg.cw, self.rng)
            if self.ap.downlink_plan:
                # the AP had already pulled its burst out of the queue
                restored = sorted(((d, a) for d, arrs in self.ap.downlink_plan
                                   for a in arrs), key=lambda p: p[1])
                self.ap.queue.extendleft(reversed(restored))
                self.ap.downlink_plan = []
            self._reset_phases()
            return end + self.recovery

        end = self._sequence(fire, winners[0], actions)
        self._finish_cycle(winners[0], end)
        return end

    # -- busy sequence ---------------------------------------------------

    def _sequence(self, t0: int, winner, actions) -> int:
        # pending entries: (start, tx, frame, end), all ns
        pending: list[tuple[int, int, Frame, int]] = []
        timer: tuple[int, str] | None = None
        last_end = t0

        def absorb(acts):
            nonlocal timer
            for a in acts:
                if type(a) is Transmit:
                    pending.append((a.start, a.frame.tx, a.frame,
                                    a.start + us_to_ns(a.frame.airtime)))
                elif type(a) is SetTimer:
                    timer = (a.expires, a.name)
                else:
                    timer = None

        absorb(actions)

        while pending or timer is not None:
            s0 = min(p[0] for p in pending) if pending else None
            if timer is not None and (s0 is None or timer[0] <= s0):
                expires, name = timer
                timer = None
                ev = ChannelEvent(EventKind.TIMER_EXPIRED, expires, timer=name)
                absorb(self._ap_step(self.ap, ev))
                continue

            group = [p for p in pending if p[0] == s0]
            if len(pending) == len(group):
                pending = []
            else:
                pending = [p for p in pending if p[0] != s0]
            if len(group) > 1:
                group.sort(key=lambda p: p[1])
                end = max(p[3] for p in group)
            else:
                end = group[0][3]
            if end > last_end:
                last_end = end

            if len(group) > 1 and any(
                    p[2].kind is FrameKind.RTS
                    or p[2].kind is FrameKind.MU_RTS for p in group):
                for _, tx, f, _fe in group:
                    self.metrics.r2_attempts += 1
                    self.metrics.r2_collisions += 1
                    self._trace_tx(end, tx, f.kind, "collided")
                    ev = ChannelEvent(EventKind.FRAME_END, end, frame=f,
                                      collided=True)
                    self._sta_step(self.stas[tx - 1], ev, self.ctx, self.rng)
                if pending:
                    # carrier sense inside the busy window
                    pending = [p for p in pending if not (s0 < p[0] < end)]
                continue

            g_cts_sent = False
            for _, tx, f, fe in group:
                self._trace_tx(fe, tx, f.kind, "ok")
                absorb(self._route(f, fe))
                if f.kind is FrameKind.G_CTS:
                    g_cts_sent = True

            if pending:
                if g_cts_sent:
                    # round 2 is over; unsent second-round requests defer
                    pending = [p for p in pending
                               if p[2].kind is not FrameKind.RTS]
                pending = [p for p in pending if not (s0 < p[0] < end)]

        return last_end

    def _route(self, f: Frame, end: int) -> list:
        """Deliver a decodable frame end to every node that reacts to it."""
        ev = ChannelEvent(EventKind.FRAME_END, end, frame=f)
        actions = []
        kind = f.kind
        ap = self.ap

        if kind is FrameKind.RTS:
            if ap.phase is ApPhase.UL_ROUND2:
                self.metrics.r2_attempts += 1
            actions.extend(self._ap_step(ap, ev))
        elif kind is FrameKind.ANT_CTS:
            for sta in self.stas:
                if sta.initiator or sta.queue:
                    actions.extend(self._sta_step(sta, ev, self.ctx, self.rng))
        elif kind is FrameKind.G_CTS:
            actions.extend(self._ap_step(ap, ev))
            for sta in self.stas:
                if sta.phase in (StaPhase.CONTEND2, StaPhase.AWAIT_G_CTS,
                                 StaPhase.AWAIT_ANT_CTS):
                    actions.extend(self._sta_step(sta, ev, self.ctx, self.rng))
        elif kind is FrameKind.G_ACK:
            for sid in f.group:
                actions.extend(self._sta_step(self.stas[sid - 1], ev,
                                              self.ctx, self.rng))
        elif kind is FrameKind.MU_RTS:
            for sid in f.group:
                actions.extend(self._sta_step(self.stas[sid - 1], ev,
                                              self.ctx, self.rng))
        elif kind is FrameKind.AMPDU:
            if f.tx == AP_ID:
                actions.extend(self._ap_step(ap, ev))
                for sid in f.group:
                    actions.extend(self._sta_step(self.stas[sid - 1], ev,
                                                  self.ctx, self.rng))
            else:
                actions.extend(self._ap_step(ap, ev))
        elif kind is FrameKind.MU_CTS:
            if f.tx == AP_ID:
                for sid in f.group:
                    actions.extend(self._sta_step(self.stas[sid - 1], ev,
                                                  self.ctx, self.rng))
            else:
                actions.extend(self._ap_step(ap, ev))
        elif kind is FrameKind.MU_ACK:
            if f.tx == AP_ID:
                for sid in f.group:
                    actions.extend(self._sta_step(self.stas[sid - 1], ev,
                                                  self.ctx, self.rng))
            else:
                actions.extend(self._ap_step(ap, ev))
        return actions

    # -- cycle completion ------------------------------------------------

    def _finish_cycle(self, winner, end: int):
        m = self.metrics
        bits = self.frame_bits
        cfg = self.cfg

        if winner is self.ap:
            for dest, arrivals in self.ap.downlink_plan:
                for arrival in arrivals:
                    m.delay_sum_ap += end - arrival
                m.delivered_ap += len(arrivals)
                m.bits_down += len(arrivals) * bits
            self.ap.downlink_plan = []
            if self.saturated:
                self._refill_ap_queue(end)
            renew_backoff(self.ap, "initiator-success", cfg.cw, self.rng)
        else:
            for sid in self.ap.round2_winners:
                sta = self.stas[sid - 1]
                nf = sta.pending_nf
                for _ in range(nf):
                    arrival = sta.queue.popleft()
                    m.delay_sum_sta += end - arrival
                    m.per_sta_delay_sum[sid - 1] += end - arrival
                m.delivered_sta += nf
                m.per_sta_delivered[sid - 1] += nf
                m.bits_up += nf * bits
                sta.pending_nf = 0
                outcome = ("initiator-success" if sta is winner
                           else "joiner-success")
                renew_backoff(sta, outcome, cfg.cw, self.rng)
                if self.saturated:
                    self._refill_sta_queues(end, only=[sta])
            renew_backoff(self.ap, "loser", cfg.cw, self.rng)

        self._reset_phases()

    def _reset_phases(self):
        for sta in self.stas:
            sta.phase = StaPhase.CONTEND1 if sta.queue else StaPhase.IDLE
            sta.backoff_2nd = None
            sta.initiator = False
            sta.pending_nf = 0
        ap = self.ap
        ap.phase = ApPhase.CONTEND1 if ap.queue else ApPhase.IDLE
        ap.round2_winners = []
        ap.round2_deadline = None
        ap.available_antennas = 0
        ap.initiator = False
        ap.expected_replies = 0
        ap.data_end = 0


def run(cfg: SimConfig, trace=None) -> Metrics:
    """Run one simulation to its horizon and return the finalized counters."""
    return Simulator(cfg, trace=trace).run()


def finalize(metrics: Metrics) -> dict:
    """Derive the report quantities from raw counters.

    Probabilities with zero attempts and delays with zero deliveries are
    reported as None rather than zero.
    """
    if metrics.sim_time_ns <= 0:
        raise ValueError("sim_time must be positive")
    sim_s = metrics.sim_time_ns * 1e-9

    def ratio(num, den):
        return num / den if den else None

    per_sta = [s / d / 1000.0 for s, d in zip(metrics.per_sta_delay_sum,
                                              metrics.per_sta_delivered) if d]
    report = {
        "schema_version": 1,
        "sim_time_us": metrics.sim_time_ns / 1000.0,
        "s_down_bps": metrics.bits_down / sim_s,
        "s_up_bps": metrics.bits_up / sim_s,
        "avg_delay_ap_us": ratio(metrics.delay_sum_ap / 1000.0,
                                 metrics.delivered_ap),
        "avg_delay_sta_us": ratio(metrics.delay_sum_sta / 1000.0,
                                  metrics.delivered_sta),
        "avg_delay_per_sta_us": (sum(per_sta) / len(per_sta)
                                 if per_sta else None),
        "p_r1_ap": ratio(metrics.r1_collisions_ap, metrics.r1_attempts_ap),
        "p_r1_sta": ratio(metrics.r1_collisions_sta, metrics.r1_attempts_sta),
        "p_r2": ratio(metrics.r2_collisions, metrics.r2_attempts),
        "tau_ap": ratio(metrics.r1_attempts_ap, metrics.slots),
        "tau_sta": ratio(metrics.r1_attempts_sta,
                         metrics.m_stas * metrics.slots),
        "delivered_ap": metrics.delivered_ap,
        "delivered_sta": metrics.delivered_sta,
        "drops": metrics.drops,
        "generated_ap": metrics.generated_ap,
        "generated_sta": metrics.generated_sta,
        "queued_end": metrics.queued_end,
    }
    return report

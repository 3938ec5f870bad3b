"""Comparison-scheme behavior: parallel downlink replies and plain
single-user uplink."""

import re

from unimumac.config import Scheme, SimConfig, Traffic
from unimumac.protocol import ProtocolTiming
from unimumac.sim import finalize, run


def collect_trace(cfg):
    lines = []
    run(cfg, trace=lines.append)
    return "".join(lines)


def parse_trace(text):
    out = []
    for line in text.splitlines():
        m = re.match(r"t_ns=(\d+) node=(\d+) ev=frame_end "
                     r"frame=(\S+) outcome=(\S+)", line)
        out.append((int(m.group(1)), int(m.group(2)), m.group(3),
                    m.group(4)))
    return out


def test_no_second_round_frames():
    cfg = SimConfig(m_stas=6, n_antennas=4, scheme=Scheme.LI_MAC,
                    horizon_us=3e5, seed=5)
    trace = collect_trace(cfg)
    assert "Ant-CTS" not in trace
    assert "G-CTS" not in trace
    assert "G-ACK" not in trace


def test_downlink_replies_land_in_one_slot():
    # AP-only traffic so every cycle is downlink: all MU-CTS replies end
    # at the same instant, one SIFS + airtime after the MU-RTS
    cfg = SimConfig(m_stas=4, n_antennas=4, scheme=Scheme.LI_MAC, cw=1,
                    traffic=Traffic.POISSON, sta_load=0.0, ap_load=8.0e6,
                    horizon_us=1e6, seed=9, warmup_frac=0.0)
    events = parse_trace(collect_trace(cfg))
    t = ProtocolTiming(cfg)
    for i, ev in enumerate(events):
        if ev[2] == "MU-RTS" and ev[3] == "ok":
            replies = cycle_replies(events, i)
            if len(replies) >= 2:
                ends = {e[0] for e in replies}
                assert ends == {ev[0] + t.sifs + t.t_mu_cts}
                return
    raise AssertionError("no multi-target downlink cycle in trace")


def cycle_replies(events, i):
    """MU-CTS events between a MU-RTS and its cycle's data frame."""
    replies = []
    for e in events[i + 1:]:
        if e[2] == "A-MPDU":
            break
        if e[2] == "MU-CTS":
            replies.append(e)
    return replies


def test_uplink_is_single_user_rts_cts():
    cfg = SimConfig(m_stas=1, n_antennas=4, scheme=Scheme.LI_MAC, cw=1,
                    traffic=Traffic.POISSON, sta_load=2.0e5, ap_load=0.0,
                    horizon_us=1e6, seed=9, warmup_frac=0.0)
    events = parse_trace(collect_trace(cfg))
    t = ProtocolTiming(cfg)
    kinds = [e[2] for e in events[:4]]
    assert kinds == ["RTS", "MU-CTS", "A-MPDU", "MU-ACK"]
    times = [e[0] for e in events[:4]]
    assert times[1] - times[0] == t.sifs + t.t_mu_cts
    # single-user data goes out on one spatial stream
    assert times[2] - times[1] == t.sifs + t.ampdu(1, 1)
    assert times[3] - times[2] == t.sifs + t.t_mu_ack


def test_uplink_carries_one_frame_per_cycle():
    sat = SimConfig(m_stas=6, n_antennas=4, scheme=Scheme.LI_MAC,
                    horizon_us=2e6, seed=3)
    r = finalize(run(sat))
    # single-packet uplink: far below the multi-user scheme's capacity
    uni = finalize(run(SimConfig(m_stas=6, n_antennas=4, horizon_us=2e6,
                                 seed=3)))
    assert r["s_up_bps"] < 0.75 * uni["s_up_bps"]


def test_baseline_downlink_serves_one_target():
    cfg = SimConfig(m_stas=4, n_antennas=4, scheme=Scheme.BASELINE, cw=1,
                    traffic=Traffic.POISSON, sta_load=0.0, ap_load=8.0e6,
                    horizon_us=1e6, seed=9, warmup_frac=0.0)
    events = parse_trace(collect_trace(cfg))
    for i, ev in enumerate(events):
        if ev[2] == "MU-RTS" and ev[3] == "ok":
            assert len(cycle_replies(events, i)) == 1
            return
    raise AssertionError("no downlink cycle in trace")

"""Event-kernel behavior: determinism, conservation, exact sequence
timing and traffic generation."""

import random
import re

import pytest

from unimumac.config import Scheme, SimConfig, Traffic
from unimumac.protocol import ProtocolTiming
from unimumac.sim import Metrics, finalize, gen_traffic, run


def collect_trace(cfg):
    lines = []
    metrics = run(cfg, trace=lines.append)
    return metrics, "".join(lines)


def parse_trace(text):
    events = []
    for line in text.splitlines():
        m = re.match(r"t_ns=(\d+) node=(\d+) ev=frame_end "
                     r"frame=(\S+) outcome=(\S+)", line)
        assert m, line
        events.append((int(m.group(1)), int(m.group(2)), m.group(3),
                       m.group(4)))
    return events


def test_identical_seeds_replay_identically():
    cfg = SimConfig(m_stas=5, n_antennas=4, horizon_us=3e5, seed=42)
    m1, t1 = collect_trace(cfg)
    m2, t2 = collect_trace(cfg)
    assert m1 == m2
    assert t1 == t2


def test_different_seeds_diverge():
    base = dict(m_stas=5, n_antennas=4, horizon_us=3e5)
    m1, _ = collect_trace(SimConfig(seed=1, **base))
    m2, _ = collect_trace(SimConfig(seed=2, **base))
    assert m1 != m2


def test_frame_conservation_saturated():
    cfg = SimConfig(m_stas=6, n_antennas=4, horizon_us=1e6, seed=3,
                    warmup_frac=0.0)
    m = run(cfg)
    assert m.generated_ap + m.generated_sta == (
        m.delivered_ap + m.delivered_sta + m.drops + m.queued_end)


def test_frame_conservation_poisson():
    cfg = SimConfig(m_stas=6, n_antennas=4, traffic=Traffic.POISSON,
                    sta_load=1.0e6, ap_load=6.0e6, horizon_us=2e6, seed=3,
                    warmup_frac=0.0)
    m = run(cfg)
    assert m.generated_ap + m.generated_sta == (
        m.delivered_ap + m.delivered_sta + m.drops + m.queued_end)
    assert m.drops == 0


def test_single_antenna_trace_has_no_antenna_announcement():
    cfg = SimConfig(m_stas=4, n_antennas=1, horizon_us=3e5, seed=5)
    _, trace = collect_trace(cfg)
    assert "Ant-CTS" not in trace
    assert "G-CTS" in trace


def test_multi_antenna_trace_runs_the_second_round():
    cfg = SimConfig(m_stas=4, n_antennas=4, horizon_us=3e5, seed=5)
    _, trace = collect_trace(cfg)
    assert "Ant-CTS" in trace
    assert "G-CTS" in trace
    assert "G-ACK" in trace


def test_uplink_sequence_timing_single_station():
    # one station, deterministic zero backoff: the trace intervals must
    # match the SIFS-separated four-way exchange exactly
    cfg = SimConfig(m_stas=1, n_antennas=1, cw=1, traffic=Traffic.POISSON,
                    sta_load=2.0e5, ap_load=0.0, horizon_us=1e6, seed=9,
                    warmup_frac=0.0)
    _, trace = collect_trace(cfg)
    events = parse_trace(trace)
    t = ProtocolTiming(cfg)
    kinds = [e[2] for e in events[:4]]
    assert kinds == ["RTS", "G-CTS", "A-MPDU", "G-ACK"]
    times = [e[0] for e in events[:4]]
    assert times[1] - times[0] == t.sifs + t.t_g_cts
    assert times[2] - times[1] == t.sifs + t.ampdu(1, 1)
    assert times[3] - times[2] == t.sifs + t.t_g_ack


def test_downlink_sequence_timing_single_target():
    cfg = SimConfig(m_stas=2, n_antennas=2, cw=1, traffic=Traffic.POISSON,
                    sta_load=0.0, ap_load=4.0e5, horizon_us=1e6, seed=9,
                    warmup_frac=0.0)
    _, trace = collect_trace(cfg)
    events = parse_trace(trace)
    t = ProtocolTiming(cfg)
    kinds = [e[2] for e in events[:4]]
    assert kinds == ["MU-RTS", "MU-CTS", "A-MPDU", "MU-ACK"]
    times = [e[0] for e in events[:4]]
    assert times[1] - times[0] == t.sifs + t.t_mu_cts
    assert times[2] - times[1] == t.sifs + t.ampdu(1, 2)
    assert times[3] - times[2] == t.sifs + t.t_mu_ack


def test_downlink_replies_arrive_in_listing_order():
    cfg = SimConfig(m_stas=4, n_antennas=4, horizon_us=2e5, seed=2)
    _, trace = collect_trace(cfg)
    events = parse_trace(trace)
    t = ProtocolTiming(cfg)
    for i, ev in enumerate(events):
        if ev[2] == "MU-RTS" and ev[3] == "ok":
            replies = [e for e in events[i + 1:i + 5] if e[2] == "MU-CTS"]
            if len(replies) >= 2:
                assert replies[1][0] - replies[0][0] == t.sifs + t.t_mu_cts
                break


def test_warmup_discards_the_leading_fraction():
    full = run(SimConfig(m_stas=4, horizon_us=1e6, seed=4, warmup_frac=0.0))
    trimmed = run(SimConfig(m_stas=4, horizon_us=1e6, seed=4,
                            warmup_frac=0.5))
    assert full.sim_time_ns > trimmed.sim_time_ns
    assert trimmed.sim_time_ns <= 0.55 * full.sim_time_ns + 1e6


def test_light_poisson_load_is_carried():
    cfg = SimConfig(m_stas=4, n_antennas=4, traffic=Traffic.POISSON,
                    sta_load=2.0e5, ap_load=8.0e5, horizon_us=5e6, seed=6,
                    warmup_frac=0.0)
    r = finalize(run(cfg))
    offered_up = 4 * 2.0e5
    assert r["drops"] == 0
    assert r["s_up_bps"] == pytest.approx(offered_up, rel=0.15)
    assert r["s_down_bps"] == pytest.approx(8.0e5, rel=0.15)


def test_queue_capacity_limits_backlog():
    cfg = SimConfig(m_stas=2, n_antennas=4, traffic=Traffic.POISSON,
                    sta_load=5.0e7, ap_load=0.0, q_sta=10, horizon_us=5e5,
                    seed=6, warmup_frac=0.0)
    m = run(cfg)
    assert m.drops > 0
    assert m.queued_end <= 2 * 10


def test_baseline_scheme_is_single_user():
    cfg = SimConfig(m_stas=4, n_antennas=4, scheme=Scheme.BASELINE,
                    horizon_us=3e5, seed=5)
    _, trace = collect_trace(cfg)
    assert "Ant-CTS" not in trace
    assert "G-CTS" not in trace
    r = finalize(run(cfg))
    assert r["s_up_bps"] > 0 and r["s_down_bps"] > 0


def test_gen_traffic_saturated_is_empty():
    assert list(gen_traffic(Traffic.SATURATED, random.Random(1))) == []
    assert list(gen_traffic(Traffic.POISSON, random.Random(1),
                            load_bits_s=0.0)) == []


def test_gen_traffic_poisson_rate():
    stream = gen_traffic(Traffic.POISSON, random.Random(8),
                         load_bits_s=1.0e6, frame_bits=8000)
    times = [next(stream) for _ in range(4000)]
    mean_gap = times[-1] / len(times)
    assert mean_gap == pytest.approx(8000.0, rel=0.05)   # us per frame
    assert times == sorted(times)


def test_finalize_rejects_empty_run():
    with pytest.raises(ValueError):
        finalize(Metrics(m_stas=1))


def test_finalize_reports_none_without_samples():
    m = Metrics(m_stas=2)
    m.reset_counters()
    m.sim_time_ns = 1_000_000
    r = finalize(m)
    assert r["avg_delay_ap_us"] is None
    assert r["p_r1_ap"] is None
    assert r["tau_sta"] is None

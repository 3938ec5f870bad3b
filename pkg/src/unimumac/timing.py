"""Airtime and timer arithmetic.

Single source of truth for time calculations used by both the event-driven
simulator and the analytic model.  All durations are expressed in
microseconds at this API; the simulator converts to integer nanoseconds
internally.  With the default system parameters every control frame body
fits in a single 4 us OFDM symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class McsParams:
    """Modulation and coding parameters, shared by every node."""

    l_dbps: int = 216        # data bits per OFDM symbol (16-QAM 1/2 @ 40 MHz)
    t_symbol: float = 4.0    # us
    channel_width: int = 40  # MHz, informational

    def __post_init__(self):
        if self.l_dbps <= 0:
            raise ValueError("l_dbps must be positive")
        if self.t_symbol <= 0:
            raise ValueError("t_symbol must be positive")


@dataclass(frozen=True)
class FrameLengths:
    """Frame body and header lengths in bits."""

    l_data: int = 8000
    l_mac: int = 272
    l_delimiter: int = 32
    l_service: int = 16
    l_tail: int = 6
    l_rts: int = 160
    l_mu_rts: int = 160
    l_mu_cts: int = 160
    l_mu_ack: int = 160
    l_ant_cts: int = 120
    l_g_cts: int = 112
    l_g_ack: int = 112

    def __post_init__(self):
        for name, value in vars(self).items():
            if value <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class IfsParams:
    """Inter-frame spaces in us.  MU-SIFS sits strictly between SIFS and
    AIFS so the AP's group CTS preempts second-round stations."""

    sifs: float = 16.0
    mu_sifs: float = 20.0
    aifs: float = 34.0
    idle_slot: float = 9.0

    def __post_init__(self):
        if not (self.sifs < self.mu_sifs < self.aifs):
            raise ValueError("require sifs < mu_sifs < aifs")
        if self.idle_slot <= 0:
            raise ValueError("idle_slot must be positive")


@dataclass(frozen=True)
class TimerSet:
    """Collision-recovery timers in us."""

    cts_timer: float
    eifs: float
    mu_cts_timer: float
    mu_eifs: float
    g_cts_timer: float


def phy_preamble_duration(n_streams: int) -> float:
    """PHY header duration: 36 us plus one 4 us training field per stream."""
    if n_streams < 1:
        raise ValueError("n_streams must be >= 1")
    return 36.0 + 4.0 * n_streams


def frame_airtime(body_bits: int, n_streams: int, mcs: McsParams,
                  lengths: FrameLengths) -> float:
    """Airtime of a frame with the given body, padded to whole symbols."""
    if body_bits < 0:
        raise ValueError("body_bits must be >= 0")
    bits = lengths.l_service + body_bits + lengths.l_tail
    symbols = math.ceil(bits / mcs.l_dbps)
    return phy_preamble_duration(n_streams) + symbols * mcs.t_symbol


def ampdu_airtime(n_frames: int, n_streams: int, mcs: McsParams,
                  lengths: FrameLengths) -> float:
    """Airtime of an aggregate of n_frames data MPDUs, one delimiter each."""
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    body = n_frames * (lengths.l_mac + lengths.l_data + lengths.l_delimiter)
    return frame_airtime(body, n_streams, mcs, lengths)


def compute_timers(n_antennas: int, cw_2nd: int, ifs: IfsParams,
                   mcs: McsParams, lengths: FrameLengths) -> TimerSet:
    """Recovery timers for RTS senders and listeners.

    The single-user CTS timer is based on the Ant-CTS length because the
    AP answers a first-round station RTS with an Ant-CTS rather than a
    plain CTS.  Control frames are sent with a single spatial stream.
    """
    if n_antennas < 1:
        raise ValueError("n_antennas must be >= 1")
    if cw_2nd < 1:
        raise ValueError("cw_2nd must be >= 1")
    t_ant_cts = frame_airtime(lengths.l_ant_cts, 1, mcs, lengths)
    t_mu_cts = frame_airtime(lengths.l_mu_cts, 1, mcs, lengths)
    t_rts = frame_airtime(lengths.l_rts, 1, mcs, lengths)
    cts_timer = ifs.sifs + t_ant_cts
    mu_cts_timer = n_antennas * (ifs.sifs + t_mu_cts)
    g_cts_timer = cw_2nd * (ifs.mu_sifs + t_rts)
    return TimerSet(
        cts_timer=cts_timer,
        eifs=cts_timer + ifs.aifs,
        mu_cts_timer=mu_cts_timer,
        mu_eifs=mu_cts_timer + ifs.aifs,
        g_cts_timer=g_cts_timer,
    )

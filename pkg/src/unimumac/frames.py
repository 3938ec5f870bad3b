"""MAC frame taxonomy and group addressing on the simulated channel.

Frames are immutable value objects.  The group id is carried as an
explicit ordered tuple of node ids; reply order follows the listing
order of the frame that solicited the replies.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable


class FrameKind(Enum):
    RTS = "RTS"
    MU_RTS = "MU-RTS"
    MU_CTS = "MU-CTS"
    MU_ACK = "MU-ACK"
    ANT_CTS = "Ant-CTS"
    G_CTS = "G-CTS"
    G_ACK = "G-ACK"
    AMPDU = "A-MPDU"


@dataclass(frozen=True)
class Frame:
    kind: FrameKind
    tx: int
    group: tuple[int, ...] = ()
    n_subframes: int = 0
    advertised_antennas: int = 0
    airtime: float = 0.0  # us


def make_mu_rts(ap: int, targets: Iterable[int], airtime: float) -> Frame:
    """Downlink MU-RTS; replies are expected in the listed target order."""
    targets = tuple(targets)
    if not targets:
        raise ValueError("MU-RTS needs at least one target")
    if len(set(targets)) != len(targets):
        raise ValueError("MU-RTS targets must be distinct")
    return Frame(FrameKind.MU_RTS, tx=ap, group=targets, airtime=airtime)


def make_ant_cts(ap: int, remaining_antennas: int, airtime: float) -> Frame:
    """Antenna announcement that opens the second contention round."""
    if remaining_antennas < 1:
        raise ValueError("Ant-CTS requires at least one remaining antenna")
    return Frame(FrameKind.ANT_CTS, tx=ap,
                 advertised_antennas=remaining_antennas, airtime=airtime)


def make_g_cts(ap: int, winners: Iterable[int], airtime: float) -> Frame:
    """Group CTS naming the stations allowed to transmit in parallel."""
    winners = tuple(winners)
    if not winners:
        raise ValueError("G-CTS needs at least one winner")
    if len(set(winners)) != len(winners):
        raise ValueError("G-CTS winners must be distinct")
    return Frame(FrameKind.G_CTS, tx=ap, group=winners, airtime=airtime)

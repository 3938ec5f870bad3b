"""Discrete-event simulator and saturation model for a two-round
down/up-link MU-MIMO WLAN MAC."""

from .analytic import (AnalyticResult, ModelInputs, SecondRoundDist,
                       cycle_durations, nonsat_collision_probs,
                       p2_ant_closed_form, saturation_throughput,
                       second_round_mc, slot_probs, tau)
from .config import Scheme, SimConfig, Traffic
from .frames import Frame, FrameKind
from .sim import Metrics, Simulator, finalize, gen_traffic, run
from .sweep import SweepSpec, analytic_point, compare, run_sweep
from .timing import (FrameLengths, IfsParams, McsParams, TimerSet,
                     ampdu_airtime, compute_timers, frame_airtime,
                     phy_preamble_duration)

__version__ = "0.1.0"

__all__ = [
    "AnalyticResult", "Frame", "FrameKind", "FrameLengths", "IfsParams",
    "McsParams", "Metrics", "ModelInputs", "Scheme", "SecondRoundDist",
    "SimConfig", "Simulator", "SweepSpec", "TimerSet", "Traffic",
    "ampdu_airtime", "analytic_point", "compare", "compute_timers",
    "cycle_durations", "finalize", "frame_airtime", "gen_traffic",
    "nonsat_collision_probs", "p2_ant_closed_form", "phy_preamble_duration",
    "run", "run_sweep", "saturation_throughput", "second_round_mc",
    "slot_probs", "tau",
]

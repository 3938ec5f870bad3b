"""Saturation-throughput model for the two-round MU-MIMO MAC.

Closed-form slot probabilities, a Monte-Carlo estimator for the
second-round winner/slot distributions, per-outcome cycle durations and
the resulting downlink/uplink saturation throughputs.  All durations are
in microseconds; throughputs are bits per second.

The per-slot transmission probability defaults to the closed form
tau = 2/(CW+1); a pluggable tau(p_collision) model can be supplied and
is solved to a damped fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import timing as tm
from .timing import FrameLengths, IfsParams, McsParams


@dataclass
class ModelInputs:
    m: int                      # contending stations (AP excluded)
    n: int                      # AP antennas / parallel streams
    cw: int = 32
    cw_2nd: int = 8
    n_f: int = 1                # aggregated frames per station
    l: int = 8000               # data payload bits per frame
    n_iteration: int = 100000
    alpha: float | None = None  # P(transmission is from the AP); 1/(M+1)
    mc_seed: int = 20130703
    mcs: McsParams = field(default_factory=McsParams)
    lengths: FrameLengths = field(default_factory=FrameLengths)
    ifs: IfsParams = field(default_factory=IfsParams)

    @property
    def alpha_eff(self) -> float:
        return 1.0 / (self.m + 1) if self.alpha is None else self.alpha

    def validate(self) -> None:
        for name in ("m", "n", "cw", "cw_2nd", "n_f", "l", "n_iteration"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 < self.alpha_eff < 1.0:
            raise ValueError("alpha must be in (0, 1)")


@dataclass
class SecondRoundDist:
    p_x_ant: np.ndarray    # index x-1, x in [1, N]: winners incl. initiator
    p_k_slot: np.ndarray   # index k-1, k in [1, CW_2nd]: slots consumed


@dataclass
class AnalyticResult:
    tau: float
    p_i: float
    p_s: float
    p_c: float
    t_s_down: float
    t_s_up: float
    t_c: float
    t_average: float
    e_2nd_slots: float
    n_b_down: float
    n_b_up: float
    s_down: float
    s_up: float
    p_collision: float
    dist: SecondRoundDist
    mc_seed: int
    n_iteration: int


def tau(cw: int) -> float:
    """Per-slot transmission probability of a saturated node."""
    if cw < 1:
        raise ValueError("cw must be >= 1")
    return 2.0 / (cw + 1)


def slot_probs(tau_val: float, m: int) -> tuple[float, float, float]:
    """(idle, success, collision) probabilities of a channel slot with
    M stations plus the AP contending."""
    p_i = (1.0 - tau_val) ** (m + 1)
    p_s = (m + 1) * tau_val * (1.0 - tau_val) ** m
    p_c = 1.0 - p_i - p_s
    return p_i, p_s, p_c


def second_round_mc(n: int, m: int, cw_2nd: int, n_iteration: int = 100000,
                    seed: int = 20130703) -> SecondRoundDist:
    """Monte-Carlo distribution of second-round outcomes.

    Each iteration the M-1 stations that lost the first round draw a
    uniform slot in [0, CW_2nd-1].  Slots are scanned in order; a slot
    chosen by exactly one station is a success.  The round stops after
    N-1 successes or when the slots run out.  x counts the granted
    antennas including the first-round winner; k counts the slots the
    round consumed.
    """
    if n < 1 or m < 1 or cw_2nd < 1:
        raise ValueError("n, m and cw_2nd must be >= 1")
    if n == 1:
        return SecondRoundDist(np.array([1.0]), np.zeros(0))

    rng = np.random.default_rng(seed)
    contenders = m - 1
    need = n - 1
    draws = rng.integers(0, cw_2nd, size=(n_iteration, contenders))
    offsets = draws + cw_2nd * np.arange(n_iteration)[:, None]
    occ = np.bincount(offsets.ravel(),
                      minlength=n_iteration * cw_2nd).reshape(n_iteration,
                                                              cw_2nd)
    singles = occ == 1
    cum = np.cumsum(singles, axis=1)
    done = cum >= need
    finished = done.any(axis=1)
    k_stop = np.where(finished, np.argmax(done, axis=1) + 1, cw_2nd)
    winners = np.where(finished, need, cum[:, -1])
    x = 1 + winners

    p_x = np.bincount(x, minlength=n + 1)[1:n + 1] / n_iteration
    p_x[0] = 1.0 - p_x[1:].sum()
    p_k = np.bincount(k_stop, minlength=cw_2nd + 1)[1:] / n_iteration
    return SecondRoundDist(p_x, p_k)


def p2_ant_closed_form(m: int) -> float:
    """Exact two-antenna, two-slot probability that the second antenna
    is granted: a single station picks the first slot, or the first slot
    fails and a single station picks the second."""
    if m < 2:
        raise ValueError("needs at least one second-round contender")
    c = m - 1
    p_single = c * 0.5 ** c          # exactly one station in a given slot
    p_both_single = 0.5 if c == 2 else 0.0
    return p_single + (p_single - p_both_single)


def _airtimes(inputs: ModelInputs) -> dict:
    mcs, lengths = inputs.mcs, inputs.lengths
    n = inputs.n
    return {
        "rts": tm.frame_airtime(lengths.l_rts, 1, mcs, lengths),
        "mu_rts": tm.frame_airtime(lengths.l_mu_rts, n, mcs, lengths),
        "mu_cts": tm.frame_airtime(lengths.l_mu_cts, 1, mcs, lengths),
        "mu_ack": tm.frame_airtime(lengths.l_mu_ack, 1, mcs, lengths),
        "ant_cts": tm.frame_airtime(lengths.l_ant_cts, 1, mcs, lengths),
        "g_cts": tm.frame_airtime(lengths.l_g_cts, 1, mcs, lengths),
        "g_ack": tm.frame_airtime(lengths.l_g_ack, 1, mcs, lengths),
        "ampdu": tm.ampdu_airtime(inputs.n_f, n, mcs, lengths),
    }


def cycle_durations(inputs: ModelInputs,
                    dist: SecondRoundDist) -> tuple[float, float, float, float]:
    """(T_s_down, T_s_up, T_c, E_2nd) in us for one channel cycle.

    E_2nd is the mean airtime of the second contention round.  With a
    single antenna there is no antenna announcement and no second round:
    the AP answers the request with the group CTS directly.
    """
    a = _airtimes(inputs)
    ifs = inputs.ifs
    n = inputs.n

    t_c = ifs.aifs + a["mu_rts"] + n * (a["mu_cts"] + ifs.sifs)
    t_s_down = t_c + a["ampdu"] + a["mu_ack"] + 2 * ifs.sifs

    if n == 1:
        e_2nd = 0.0
        t_s_up = (ifs.aifs + a["rts"] + a["g_cts"] + a["ampdu"] + a["g_ack"]
                  + 3 * ifs.sifs)
    else:
        ks = np.arange(1, dist.p_k_slot.size + 1)
        e_2nd = (a["rts"] + ifs.mu_sifs) * float(ks @ dist.p_k_slot)
        t_s_up = (ifs.aifs + a["rts"] + a["ant_cts"] + e_2nd + a["g_cts"]
                  + a["ampdu"] + a["g_ack"] + 4 * ifs.sifs)
    return t_s_down, t_s_up, t_c, e_2nd


def saturation_throughput(inputs: ModelInputs,
                          tau_model=None) -> AnalyticResult:
    """Evaluate the saturation model end to end.

    tau_model, if given, maps the first-round collision probability to a
    transmission probability and is iterated to a damped fixed point.
    """
    inputs.validate()
    m = inputs.m
    tau_val = tau(inputs.cw)
    if tau_model is not None:
        for _ in range(10000):
            p_coll = 1.0 - (1.0 - tau_val) ** m
            nxt = tau_model(p_coll)
            if not 0.0 <= nxt <= 1.0:
                raise ValueError("tau model left the [0, 1] range")
            if abs(nxt - tau_val) < 1e-9:
                tau_val = nxt
                break
            tau_val += 0.5 * (nxt - tau_val)
        else:
            raise RuntimeError("tau fixed point did not converge")

    p_i, p_s, p_c = slot_probs(tau_val, m)
    dist = second_round_mc(inputs.n, m, inputs.cw_2nd,
                           inputs.n_iteration, inputs.mc_seed)
    t_s_down, t_s_up, t_c, e_2nd = cycle_durations(inputs, dist)

    alpha = inputs.alpha_eff
    xs = np.arange(1, dist.p_x_ant.size + 1)
    mean_x = float(xs @ dist.p_x_ant)
    n_b_down = alpha * inputs.n * inputs.n_f * inputs.l * p_s
    n_b_up = (1.0 - alpha) * inputs.n_f * inputs.l * p_s * mean_x
    t_average = (alpha * p_s * t_s_down + (1.0 - alpha) * p_s * t_s_up
                 + p_c * t_c + p_i * inputs.ifs.idle_slot)
    s_down = n_b_down / t_average * 1e6
    s_up = n_b_up / t_average * 1e6
    p_collision = 1.0 - (1.0 - tau_val) ** m

    return AnalyticResult(
        tau=tau_val, p_i=p_i, p_s=p_s, p_c=p_c,
        t_s_down=t_s_down, t_s_up=t_s_up, t_c=t_c, t_average=t_average,
        e_2nd_slots=e_2nd, n_b_down=n_b_down, n_b_up=n_b_up,
        s_down=s_down, s_up=s_up, p_collision=p_collision, dist=dist,
        mc_seed=inputs.mc_seed, n_iteration=inputs.n_iteration)


def nonsat_collision_probs(tau_ap: float, tau_sta: float,
                           m: int) -> tuple[float, float]:
    """First-round collision probability seen by the AP and by a station
    when their per-slot transmission probabilities differ."""
    if not (0.0 <= tau_ap <= 1.0 and 0.0 <= tau_sta <= 1.0):
        raise ValueError("transmission probabilities must be in [0, 1]")
    p_ap = 1.0 - (1.0 - tau_sta) ** m
    p_sta = 1.0 - (1.0 - tau_sta) ** (m - 1) * (1.0 - tau_ap)
    return p_ap, p_sta

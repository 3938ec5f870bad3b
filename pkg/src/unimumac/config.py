"""Run configuration for the simulator and experiment drivers."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from enum import Enum

from .timing import McsParams, FrameLengths, IfsParams


class Scheme(Enum):
    UNI_MUMAC = "uni-mumac"
    LI_MAC = "li-mac"
    BASELINE = "baseline"


class Traffic(Enum):
    SATURATED = "saturated"
    POISSON = "poisson"


@dataclass
class SimConfig:
    m_stas: int = 8
    n_antennas: int = 4
    cw: int = 32
    cw_2nd: int = 8
    scheme: Scheme = Scheme.UNI_MUMAC
    traffic: Traffic = Traffic.SATURATED
    sta_load: float = 0.0          # bits/s offered per STA (Poisson only)
    ap_load: float = 0.0           # bits/s offered at the AP (Poisson only)
    q_sta: int = 50
    q_ap: int | None = None        # defaults to m_stas**2
    nf_ap_cap: int | None = None   # per-destination aggregate cap, defaults to m_stas
    nf_sta: int = 1
    horizon_us: float = 60e6
    warmup_frac: float = 0.05
    seed: int = 1
    mcs: McsParams = field(default_factory=McsParams)
    lengths: FrameLengths = field(default_factory=FrameLengths)
    ifs: IfsParams = field(default_factory=IfsParams)

    @property
    def q_ap_eff(self) -> int:
        return self.m_stas ** 2 if self.q_ap is None else self.q_ap

    @property
    def nf_ap_eff(self) -> int:
        return self.m_stas if self.nf_ap_cap is None else self.nf_ap_cap

    def validate(self) -> None:
        if self.m_stas < 1:
            raise ValueError("m_stas must be >= 1")
        if self.n_antennas < 1:
            raise ValueError("n_antennas must be >= 1")
        if self.cw < 1:
            raise ValueError("cw must be >= 1")
        if self.cw_2nd < 1:
            raise ValueError("cw_2nd must be >= 1")
        if self.q_sta < 1 or self.q_ap_eff < 1:
            raise ValueError("queue capacities must be >= 1")
        if self.nf_sta < 1 or self.nf_ap_eff < 1:
            raise ValueError("aggregation limits must be >= 1")
        if self.horizon_us <= 0:
            raise ValueError("horizon_us must be positive")
        if not 0.0 <= self.warmup_frac < 1.0:
            raise ValueError("warmup_frac must be in [0, 1)")
        if self.traffic is Traffic.POISSON:
            if self.sta_load < 0 or self.ap_load < 0:
                raise ValueError("loads must be >= 0")

    def snapshot(self) -> dict:
        """Flat config echo for result provenance."""
        d = asdict(self)
        d["scheme"] = self.scheme.value
        d["traffic"] = self.traffic.value
        d["q_ap"] = self.q_ap_eff
        d["nf_ap_cap"] = self.nf_ap_eff
        for key in ("mcs", "lengths", "ifs"):
            sub = d.pop(key)
            d.update({f"{key}.{k}": v for k, v in sub.items()})
        return d

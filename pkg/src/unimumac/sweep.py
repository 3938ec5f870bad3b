"""Parameter-sweep harness and simulation-vs-model comparison."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .analytic import ModelInputs, saturation_throughput
from .config import SimConfig, Traffic
from .sim import finalize, run

SWEEP_VARIABLES = ("cw_2nd", "m_stas", "n_antennas")


@dataclass
class SweepSpec:
    variable: str = "cw_2nd"
    values: list[int] = field(default_factory=list)
    replications: int = 1
    base_seed: int = 1

    def validate(self) -> None:
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"unknown sweep variable: {self.variable}")
        if not self.values:
            raise ValueError("sweep range is empty")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")

    def point_seed(self, point: int, rep: int) -> int:
        # distinct, reproducible stream per (point, replication)
        return self.base_seed * 100003 + point * 1009 + rep


def analytic_point(cfg: SimConfig) -> dict:
    """Saturation-model throughputs for one configuration."""
    inputs = ModelInputs(m=cfg.m_stas, n=cfg.n_antennas, cw=cfg.cw,
                         cw_2nd=cfg.cw_2nd, n_f=cfg.nf_sta,
                         l=cfg.lengths.l_data, mcs=cfg.mcs,
                         lengths=cfg.lengths, ifs=cfg.ifs)
    res = saturation_throughput(inputs)
    return {
        "analytic_s_down_bps": res.s_down,
        "analytic_s_up_bps": res.s_up,
        "analytic_p_collision": res.p_collision,
        "analytic_t_average_us": res.t_average,
    }


def _run_point(args) -> dict:
    cfg, point, value, rep, variable, with_analytic = args
    try:
        row = {"schema_version": 1, "point": point, "variable": variable,
               "value": value, "replication": rep}
        row.update(cfg.snapshot())
        row.update(finalize(run(cfg)))
        if with_analytic:
            row.update(analytic_point(cfg))
        return row
    except Exception as exc:
        raise RuntimeError(f"run failed for config {cfg.snapshot()}") from exc


def run_sweep(spec: SweepSpec, base_cfg: SimConfig,
              with_analytic: bool = False, workers: int = 1) -> list[dict]:
    """One row per (sweep point, replication), ordered by point index."""
    spec.validate()
    if with_analytic and base_cfg.traffic is not Traffic.SATURATED:
        raise ValueError("the analytic model covers saturated traffic only")
    jobs = []
    for point, value in enumerate(spec.values):
        for rep in range(spec.replications):
            cfg = replace(base_cfg, **{spec.variable: value},
                          seed=spec.point_seed(point, rep))
            jobs.append((cfg, point, value, rep, spec.variable,
                         with_analytic))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_point, jobs))
    return [_run_point(job) for job in jobs]


def compare(sim_rows: list[dict], analytic_rows: list[dict]) -> dict:
    """Per-point relative throughput differences and their summary.

    Rows are joined on the "point" column; every simulation point must
    have a model counterpart.
    """
    model = {r["point"]: r for r in analytic_rows}
    rows = []
    for r in sim_rows:
        key = r["point"]
        if key not in model:
            raise ValueError(f"no analytic row for point {key}")
        a = model[key]
        rel_down = (abs(r["s_down_bps"] - a["analytic_s_down_bps"])
                    / a["analytic_s_down_bps"])
        rel_up = (abs(r["s_up_bps"] - a["analytic_s_up_bps"])
                  / a["analytic_s_up_bps"])
        rows.append({"point": key, "value": r.get("value"),
                     "rel_diff_down": rel_down, "rel_diff_up": rel_up})
    diffs = [d for row in rows for d in (row["rel_diff_down"],
                                         row["rel_diff_up"])]
    return {"rows": rows,
            "max_rel_diff": max(diffs) if diffs else 0.0,
            "mean_rel_diff": sum(diffs) / len(diffs) if diffs else 0.0}

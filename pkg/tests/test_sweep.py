"""Sweep harness: row layout, reproducibility and the diff report."""

import pytest

from unimumac.config import SimConfig, Traffic
from unimumac.sweep import SweepSpec, compare, run_sweep


def small_cfg(**kw):
    base = dict(m_stas=3, n_antennas=2, horizon_us=2e5, warmup_frac=0.0)
    base.update(kw)
    return SimConfig(**base)


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(variable="cw_2nd", values=[]).validate()
    with pytest.raises(ValueError):
        SweepSpec(variable="horizon_us", values=[1]).validate()
    with pytest.raises(ValueError):
        SweepSpec(variable="cw_2nd", values=[4], replications=0).validate()


def test_rows_cover_every_point_and_replication():
    spec = SweepSpec(variable="cw_2nd", values=[4, 8], replications=2)
    rows = run_sweep(spec, small_cfg())
    assert [(r["point"], r["replication"]) for r in rows] == [
        (0, 0), (0, 1), (1, 0), (1, 1)]
    assert [r["value"] for r in rows] == [4, 4, 8, 8]
    # config echo reflects the swept value
    assert [r["cw_2nd"] for r in rows] == [4, 4, 8, 8]
    assert all("s_down_bps" in r and "schema_version" in r for r in rows)


def test_rows_are_reproducible():
    spec = SweepSpec(variable="m_stas", values=[2, 4])
    assert run_sweep(spec, small_cfg()) == run_sweep(spec, small_cfg())


def test_replications_use_distinct_seeds():
    spec = SweepSpec(variable="cw_2nd", values=[8], replications=2)
    rows = run_sweep(spec, small_cfg())
    assert rows[0]["seed"] != rows[1]["seed"]
    assert rows[0]["s_up_bps"] != rows[1]["s_up_bps"]


def test_analytic_columns_require_saturation():
    spec = SweepSpec(variable="cw_2nd", values=[8])
    poisson = small_cfg(traffic=Traffic.POISSON, sta_load=1e5, ap_load=1e5)
    with pytest.raises(ValueError):
        run_sweep(spec, poisson, with_analytic=True)
    rows = run_sweep(spec, small_cfg(), with_analytic=True)
    assert "analytic_s_up_bps" in rows[0]


def test_compare_identical_tables_is_zero():
    rows = [{"point": 0, "value": 8, "s_down_bps": 2e6, "s_up_bps": 9e6,
             "analytic_s_down_bps": 2e6, "analytic_s_up_bps": 9e6}]
    model = [{"point": 0, "analytic_s_down_bps": 2e6,
              "analytic_s_up_bps": 9e6}]
    diff = compare(rows, model)
    assert diff["max_rel_diff"] == 0.0
    assert diff["mean_rel_diff"] == 0.0


def test_compare_reports_relative_gap():
    rows = [{"point": 0, "value": 8, "s_down_bps": 1.1e6, "s_up_bps": 2e6}]
    model = [{"point": 0, "analytic_s_down_bps": 1.0e6,
              "analytic_s_up_bps": 2e6}]
    diff = compare(rows, model)
    assert diff["max_rel_diff"] == pytest.approx(0.1)


def test_compare_rejects_key_mismatch():
    rows = [{"point": 3, "s_down_bps": 1.0, "s_up_bps": 1.0}]
    with pytest.raises(ValueError):
        compare(rows, [{"point": 0, "analytic_s_down_bps": 1.0,
                        "analytic_s_up_bps": 1.0}])

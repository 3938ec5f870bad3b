"""Command-line experiment driver.

Builds a run configuration from flags (optionally seeded from a flat
key=value config file), executes a single run or a parameter sweep,
optionally pairs each saturated point with the analytic model, and
writes CSV / JSON / PNG outputs.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import Scheme, SimConfig, Traffic
from .report import render_figure, write_csv, write_json
from .sim import finalize, run
from .sweep import SweepSpec, analytic_point, compare, run_sweep

SCENARIOS = ("saturated", "downlink-dominant", "balanced", "custom")
_SWEEP_ALIASES = {"cw2nd": "cw_2nd", "cw_2nd": "cw_2nd",
                  "m": "m_stas", "m_stas": "m_stas",
                  "n": "n_antennas", "n_antennas": "n_antennas"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="unimumac",
        description="Two-round MU-MIMO WLAN MAC simulator and "
                    "saturation-model evaluator.")
    p.add_argument("--scheme", choices=[s.value for s in Scheme],
                   default="uni-mumac")
    p.add_argument("--scenario", choices=SCENARIOS, default="saturated")
    p.add_argument("--m", type=int, default=8, help="number of stations")
    p.add_argument("--n", type=int, default=4, help="AP antennas")
    p.add_argument("--cw", type=int, default=32)
    p.add_argument("--cw2nd", type=int, default=8)
    p.add_argument("--sta-load", type=float, default=0.0,
                   help="offered load per station, bits/s")
    p.add_argument("--ap-load", type=float, default=0.0,
                   help="offered load at the AP, bits/s (custom scenario)")
    p.add_argument("--nf-ap", type=int, default=None,
                   help="per-destination downlink aggregation cap")
    p.add_argument("--nf-sta", type=int, default=1,
                   help="uplink aggregation per station")
    p.add_argument("--horizon", type=float, default=60e6,
                   help="simulated time, us")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--sweep", metavar="VAR:LO:HI:STEP", default=None,
                   help="sweep cw2nd, m or n over an inclusive range")
    p.add_argument("--analytic", action="store_true",
                   help="attach saturation-model columns to each row")
    p.add_argument("--compare", action="store_true",
                   help="print the simulation-vs-model diff summary")
    p.add_argument("--out", default=None, help="CSV output path; a JSON "
                   "snapshot is written alongside")
    p.add_argument("--plot", default=None, help="PNG figure output path")
    p.add_argument("--trace", default=None,
                   help="event trace output path (single run only)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None,
                   help="flat key=value file supplying flag defaults")
    return p


def load_config_file(path: str) -> dict:
    """Flat key=value defaults; keys use flag spelling without dashes."""
    out: dict = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        try:
            out[key] = int(value)
        except ValueError:
            try:
                out[key] = float(value)
            except ValueError:
                out[key] = value
    return out


def scenario_loads(scenario: str, m: int, sta_load: float,
                   ap_load: float) -> tuple[Traffic, float, float]:
    if scenario == "saturated":
        return Traffic.SATURATED, 0.0, 0.0
    if sta_load <= 0 and scenario != "custom":
        raise ValueError(f"scenario {scenario} needs --sta-load")
    if scenario == "downlink-dominant":
        return Traffic.POISSON, sta_load, 4 * m * sta_load
    if scenario == "balanced":
        return Traffic.POISSON, sta_load, m * sta_load
    return Traffic.POISSON, sta_load, ap_load


def build_config(args) -> SimConfig:
    traffic, sta_load, ap_load = scenario_loads(
        args.scenario, args.m, args.sta_load, args.ap_load)
    cfg = SimConfig(m_stas=args.m, n_antennas=args.n, cw=args.cw,
                    cw_2nd=args.cw2nd, scheme=Scheme(args.scheme),
                    traffic=traffic, sta_load=sta_load, ap_load=ap_load,
                    nf_ap_cap=args.nf_ap, nf_sta=args.nf_sta,
                    horizon_us=args.horizon, seed=args.seed)
    cfg.validate()
    return cfg


def parse_sweep(arg: str | None, cfg: SimConfig, args) -> SweepSpec:
    if arg is None:
        var = "cw_2nd"
        values = [cfg.cw_2nd]
    else:
        parts = arg.split(":")
        if len(parts) != 4:
            raise ValueError("--sweep expects VAR:LO:HI:STEP")
        name, lo, hi, step = parts[0], int(parts[1]), int(parts[2]), \
            int(parts[3])
        var = _SWEEP_ALIASES.get(name)
        if var is None:
            raise ValueError(f"cannot sweep over {name!r}")
        if step < 1 or hi < lo:
            raise ValueError("--sweep range must be increasing")
        values = list(range(lo, hi + 1, step))
    return SweepSpec(variable=var, values=values,
                     replications=args.replications, base_seed=args.seed)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    try:
        if args.config:
            defaults = load_config_file(args.config)
            unknown = set(defaults) - {a.dest for a in parser._actions}
            if unknown:
                raise ValueError(f"unknown config keys: {sorted(unknown)}")
            parser.set_defaults(**defaults)
            args = parser.parse_args(argv)
        cfg = build_config(args)
        spec = parse_sweep(args.sweep, cfg, args)
        if args.compare and not args.analytic:
            raise ValueError("--compare requires --analytic")
        if args.trace and (len(spec.values) > 1 or spec.replications > 1):
            raise ValueError("--trace needs a single run")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.trace:
            cfg_one = dataclasses.replace(cfg, seed=spec.point_seed(0, 0))
            with open(args.trace, "w") as fh:
                metrics = run(cfg_one, trace=fh.write)
            row = {"schema_version": 1, "point": 0, "variable": spec.variable,
                   "value": spec.values[0], "replication": 0}
            row.update(cfg_one.snapshot())
            row.update(finalize(metrics))
            if args.analytic:
                row.update(analytic_point(cfg_one))
            rows = [row]
        else:
            rows = run_sweep(spec, cfg, with_analytic=args.analytic,
                             workers=args.workers)

        for row in rows:
            print(f"{spec.variable}={row['value']} rep={row['replication']} "
                  f"S_down={row['s_down_bps'] / 1e6:.3f} Mbps "
                  f"S_up={row['s_up_bps'] / 1e6:.3f} Mbps")
        if args.compare:
            model_rows = [{"point": r["point"], **{k: r[k] for k in r
                           if k.startswith("analytic_")}} for r in rows]
            diff = compare(rows, model_rows)
            print(f"max relative diff: {diff['max_rel_diff']:.4f}  "
                  f"mean: {diff['mean_rel_diff']:.4f}")
        if args.out:
            write_csv(rows, args.out)
            write_json({"schema_version": 1, "config": cfg.snapshot(),
                        "rows": rows}, Path(args.out).with_suffix(".json"))
        if args.plot:
            render_figure(rows, spec.variable, args.plot)
    except Exception as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

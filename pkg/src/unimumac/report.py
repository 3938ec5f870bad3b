"""Result export: CSV tables, JSON snapshots and throughput figures."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def write_csv(rows: list[dict], path: str | Path) -> None:
    """One row per run; the column set is the union over rows so the
    schema depends only on what the sweep produced, not on values."""
    if not rows:
        raise ValueError("no rows to write")
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def write_json(payload: dict, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def render_figure(rows: list[dict], x_label: str, path: str | Path) -> None:
    """Downlink/uplink throughput against the swept variable, with the
    analytic curves overlaid when the rows carry them."""
    if not rows:
        raise ValueError("no rows to plot")
    xs = [r["value"] for r in rows]
    to_mbps = 1e-6
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(xs, [r["s_down_bps"] * to_mbps for r in rows],
            "o-", label="S_down (sim)")
    ax.plot(xs, [r["s_up_bps"] * to_mbps for r in rows],
            "s-", label="S_up (sim)")
    if "analytic_s_down_bps" in rows[0]:
        ax.plot(xs, [r["analytic_s_down_bps"] * to_mbps for r in rows],
                "--", label="S_down (model)")
        ax.plot(xs, [r["analytic_s_up_bps"] * to_mbps for r in rows],
                ":", label="S_up (model)")
    ax.set_xlabel(x_label)
    ax.set_ylabel("throughput (Mbps)")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

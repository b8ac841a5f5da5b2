"""Figure rendering for sweep results: reward and energy-efficiency curves
per algorithm versus the swept axis, written as PNG files next to the CSV.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

AXIS_LABELS = {
    "gamma": "discount factor",
    "eh": "harvest probability p = q",
    "bsmax": "source battery capacity (units)",
    "bdmax": "destination battery capacity (units)",
    "alpha": "self-interference attenuation",
}

_AXIS_COLUMN = {
    "gamma": "gamma",
    "eh": "p",
    "bsmax": "bSmax",
    "bdmax": "bDmax",
    "alpha": "alpha",
}


def _series(rows: list[dict], axis: str):
    col = _AXIS_COLUMN[axis]
    by_alg: dict[str, list[dict]] = {}
    for row in rows:
        by_alg.setdefault(row["algorithm"], []).append(row)
    for alg_rows in by_alg.values():
        alg_rows.sort(key=lambda r: r[col])
    return col, by_alg


def _plot_metric(rows, axis, value_col, err_col, ylabel, path):
    col, by_alg = _series(rows, axis)
    fig, ax = plt.subplots(figsize=(6, 4))
    for alg, alg_rows in sorted(by_alg.items()):
        x = [r[col] for r in alg_rows]
        y = [r[value_col] for r in alg_rows]
        err = [r[err_col] for r in alg_rows]
        ax.errorbar(x, y, yerr=err, marker="o", capsize=3, label=alg.upper())
    if axis == "alpha":
        ax.set_xscale("log")
    ax.set_xlabel(AXIS_LABELS[axis])
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep_figures(rows: list[dict], axis: str, out_dir: str) -> list[str]:
    """Write reward and energy-efficiency figures; returns the file paths."""
    os.makedirs(out_dir, exist_ok=True)
    reward_path = os.path.join(out_dir, f"sweep_{axis}_reward.png")
    ee_path = os.path.join(out_dir, f"sweep_{axis}_efficiency.png")
    _plot_metric(
        rows, axis, "mean_reward_bits", "reward_stderr",
        "expected total secure bits", reward_path,
    )
    _plot_metric(
        rows, axis, "energy_eff_bits_per_unit", "ee_stderr",
        "energy efficiency (bits / energy unit)", ee_path,
    )
    return [reward_path, ee_path]

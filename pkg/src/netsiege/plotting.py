"""Chart emission: training curves, evaluation bars, score densities.

All charts are written as SVG with a fixed hash salt and no embedded date,
so rerunning a plot command on the same inputs yields identical bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from netsiege.errors import InvalidConfigError
from netsiege.training import TRAINING_LOG_HEADER, smooth_curve

_SVG_SALT = "netsiege"


def _new_figure(width=7.0, height=4.5):
    plt.rcParams["svg.hashsalt"] = _SVG_SALT
    return plt.subplots(figsize=(width, height))


def _save(fig, out_path) -> None:
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def read_training_log(path) -> list[dict]:
    """Parse a training CSV; raises with the offending line number."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != TRAINING_LOG_HEADER:
            raise InvalidConfigError(f"{path}: line 1: not a training log (bad header)")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 7:
                raise InvalidConfigError(f"{path}: line {lineno}: expected 7 fields")
            try:
                rows.append(
                    {
                        "epoch": int(row[0]),
                        "regime": row[1],
                        "active_attacker": row[2],
                        "defender_reward": float(row[3]),
                        "attacker_reward": float(row[4]),
                        "episode_length": int(row[5]),
                        "winner": row[6],
                    }
                )
            except ValueError as exc:
                raise InvalidConfigError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise InvalidConfigError(f"{path}: line 2: log has no data rows")
    return rows


def plot_training_curves(log_path, out_path, smooth_order: int = 5) -> None:
    """Raw plus polynomial-smoothed reward curves, one per agent stream."""
    rows = read_training_log(log_path)
    fig, ax = _new_figure()

    epochs = np.array([r["epoch"] for r in rows])
    defender = np.array([r["defender_reward"] for r in rows])
    series = [("defender", epochs, defender, "tab:blue")]
    palette = {"ransomware": "tab:red", "apt": "tab:orange"}
    for kind, color in palette.items():
        sel = [r for r in rows if r["active_attacker"] == kind]
        if sel:
            series.append(
                (
                    kind,
                    np.array([r["epoch"] for r in sel]),
                    np.array([r["attacker_reward"] for r in sel]),
                    color,
                )
            )

    for label, x, y, color in series:
        ax.plot(x, y, color=color, alpha=0.25, linewidth=0.7)
        if len(y) > smooth_order:
            ax.plot(x, smooth_curve(y, smooth_order), color=color, linewidth=2.0, label=label)
        else:
            ax.plot(x, y, color=color, linewidth=2.0, label=label)

    ax.set_xlabel("epoch")
    ax.set_ylabel("episode reward")
    ax.set_title(f"Training rewards (smoothing order {smooth_order})")
    ax.legend()
    _save(fig, out_path)


def read_matrix_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = {"defender", "attacker_type", "mean", "iqm", "win_rate", "n_episodes"}
        if reader.fieldnames is None or set(reader.fieldnames) != expected:
            raise InvalidConfigError(f"{path}: line 1: not an evaluation matrix CSV")
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(
                    {
                        "defender": row["defender"],
                        "attacker_type": row["attacker_type"],
                        "mean": float(row["mean"]),
                        "iqm": float(row["iqm"]),
                        "win_rate": float(row["win_rate"]),
                        "n_episodes": int(row["n_episodes"]),
                    }
                )
            except ValueError as exc:
                raise InvalidConfigError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise InvalidConfigError(f"{path}: line 2: matrix has no data rows")
    return rows


def plot_eval_bars(matrix_csv_path, out_path, metric: str = "mean") -> None:
    """Grouped bars: one group per defender, one bar per attacker type."""
    if metric not in {"mean", "iqm", "win_rate"}:
        raise InvalidConfigError(f"unknown metric {metric!r}")
    rows = read_matrix_csv(matrix_csv_path)
    defenders = sorted({r["defender"] for r in rows})
    attacker_types = sorted({r["attacker_type"] for r in rows})
    values = {
        (r["defender"], r["attacker_type"]): r[metric] for r in rows
    }

    fig, ax = _new_figure()
    x = np.arange(len(defenders))
    width = 0.8 / len(attacker_types)
    colors = ["tab:red", "tab:orange", "tab:green", "tab:purple"]
    for j, at in enumerate(attacker_types):
        heights = [values.get((d, at), np.nan) for d in defenders]
        ax.bar(x + j * width, heights, width, label=at, color=colors[j % len(colors)])
    ax.set_xticks(x + width * (len(attacker_types) - 1) / 2)
    ax.set_xticklabels(defenders)
    ax.set_ylabel(metric.replace("_", " "))
    ax.set_title(f"Evaluation {metric.replace('_', ' ')} by defender and attacker type")
    ax.legend()
    _save(fig, out_path)


def plot_score_distributions(reports: list[dict], out_path, attacker_type: str) -> None:
    """Overlaid density histograms of defender scores for one attacker type."""
    fig, ax = _new_figure()
    colors = ["tab:blue", "tab:red", "tab:green", "tab:purple", "tab:orange"]
    plotted = 0
    for i, rep in enumerate(sorted(reports, key=lambda r: r["defender_label"])):
        if rep["attacker_type"] != attacker_type:
            continue
        edges = np.array(rep["histogram"]["bin_edges"])
        dens = np.array(rep["histogram"]["densities"])
        ax.stairs(dens, edges, label=rep["defender_label"], color=colors[i % len(colors)])
        plotted += 1
    if plotted == 0:
        raise InvalidConfigError(f"no reports for attacker type {attacker_type!r}")
    ax.set_xlabel("defender score")
    ax.set_ylabel("probability density")
    ax.set_title(f"Score distribution vs {attacker_type}")
    ax.legend()
    _save(fig, out_path)

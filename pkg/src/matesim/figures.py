"""Figure rendering for run, comparison, optimizer, and graph outputs.

All figures go straight to PNG files via the Agg backend (no display
server needed); every renderer returns the list of paths it wrote so
the CLI can report them.
"""

from __future__ import annotations

import os
from typing import TYPE_CHECKING

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import CELL_ORDER_COLUMNS

if TYPE_CHECKING:
    from .engine import ComparisonReport, RunRecord
    from .network import MatingGraph

__all__ = [
    "run_figures",
    "comparison_figures",
    "optimizer_figure",
    "graph_figure",
]

plt.rcParams.update(
    {
        "figure.dpi": 120,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "font.size": 9,
    }
)

_CELL_COLORS = {
    "AM": "#1f77b4",
    "AF": "#aec7e8",
    "BM": "#2ca02c",
    "BF": "#98df8a",
    "CM": "#d62728",
    "CF": "#ff9896",
}


def _cell_label(cell) -> str:
    tier, gender = cell
    return f"{tier.value}{gender.value}"


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def run_figures(record: "RunRecord", out_dir: str, stem: str) -> list[str]:
    """Three panels for one run: cell welfare, demography, inequality."""
    steps = [f.step for f in record.frames]
    paths = []

    fig, ax = plt.subplots(figsize=(7, 4))
    for cell in CELL_ORDER_COLUMNS:
        label = _cell_label(cell)
        ax.plot(
            steps,
            [f.welfare_cells[cell] for f in record.frames],
            label=label,
            color=_CELL_COLORS[label],
        )
    ax.set_xlabel("step")
    ax.set_ylabel("mean welfare (0-10)")
    ax.set_title(f"Welfare by tier and gender ({record.institution}, seed {record.seed})")
    ax.legend(ncol=3, fontsize=8)
    paths.append(_save(fig, os.path.join(out_dir, f"{stem}_welfare.png")))

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(steps, [f.tfr for f in record.frames], color="#1f77b4")
    ax1.set_xlabel("step")
    ax1.set_ylabel("TFR (trailing window)")
    ax1.set_title("Total fertility rate")
    ax2.plot(steps, [f.births for f in record.frames], label="births", color="#2ca02c")
    ax2.plot(steps, [f.deaths for f in record.frames], label="deaths", color="#d62728")
    ax2.set_xlabel("step")
    ax2.set_ylabel("count")
    ax2.set_title("Births and deaths per step")
    ax2.legend()
    paths.append(_save(fig, os.path.join(out_dir, f"{stem}_demography.png")))

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(steps, [f.gini_wealth for f in record.frames], label="wealth")
    ax1.plot(steps, [f.gini_welfare for f in record.frames], label="welfare")
    ax1.set_xlabel("step")
    ax1.set_ylabel("Gini")
    ax1.set_title("Inequality")
    ax1.legend()
    ax2.plot(steps, [f.unpartnered_male_frac for f in record.frames], color="#9467bd")
    ax2.axhline(0.20, color="red", linestyle="--", linewidth=1, label="0.20 threshold")
    ax2.set_xlabel("step")
    ax2.set_ylabel("unpartnered adult male fraction")
    ax2.set_title("Stability proxy")
    ax2.legend()
    paths.append(_save(fig, os.path.join(out_dir, f"{stem}_inequality.png")))
    return paths


def comparison_figures(report: "ComparisonReport", out_dir: str, stem: str) -> list[str]:
    """Comparison panels: per-cell welfare bars and paired trajectories."""
    import numpy as np

    paths = []
    labels = [_cell_label(c) for c in CELL_ORDER_COLUMNS]
    mean_a = [
        float(np.mean([p.cell_welfare_a[c] for p in report.pairs]))
        for c in CELL_ORDER_COLUMNS
    ]
    mean_b = [
        float(np.mean([p.cell_welfare_b[c] for p in report.pairs]))
        for c in CELL_ORDER_COLUMNS
    ]
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(x - 0.2, mean_b, width=0.4, label=report.institution_b, color="#999999")
    ax.bar(x + 0.2, mean_a, width=0.4, label=report.institution_a, color="#1f77b4")
    ax.set_xticks(x)
    ax.set_xticklabels(labels)
    ax.set_ylabel("mean welfare (0-10)")
    ax.set_title(
        f"Welfare by cell, mean over {len(report.pairs)} paired seeds "
        f"(final {report.window}-step window)"
    )
    ax.legend()
    paths.append(_save(fig, os.path.join(out_dir, f"{stem}_welfare_cells.png")))

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    steps = [f.step for f in report.pairs[0].record_a.frames]
    gini_a = np.mean(
        [[f.gini_wealth for f in p.record_a.frames] for p in report.pairs], axis=0
    )
    gini_b = np.mean(
        [[f.gini_wealth for f in p.record_b.frames] for p in report.pairs], axis=0
    )
    ax1.plot(steps, gini_b, label=report.institution_b, color="#999999")
    ax1.plot(steps, gini_a, label=report.institution_a, color="#1f77b4")
    ax1.set_xlabel("step")
    ax1.set_ylabel("wealth Gini (seed mean)")
    ax1.set_title("Wealth inequality")
    ax1.legend()
    tfr_a = np.mean([[f.tfr for f in p.record_a.frames] for p in report.pairs], axis=0)
    tfr_b = np.mean([[f.tfr for f in p.record_b.frames] for p in report.pairs], axis=0)
    ax2.plot(steps, tfr_b, label=report.institution_b, color="#999999")
    ax2.plot(steps, tfr_a, label=report.institution_a, color="#1f77b4")
    ax2.set_xlabel("step")
    ax2.set_ylabel("TFR (seed mean)")
    ax2.set_title("Fertility")
    ax2.legend()
    paths.append(_save(fig, os.path.join(out_dir, f"{stem}_trajectories.png")))
    return paths


def optimizer_figure(history: list[dict], out_dir: str, stem: str) -> list[str]:
    fig, ax = plt.subplots(figsize=(6, 4))
    gens = [row["generation"] for row in history]
    ax.plot(gens, [row["best_fitness"] for row in history], label="best", color="#1f77b4")
    ax.plot(
        gens, [row["mean_fitness"] for row in history], label="population mean",
        color="#999999",
    )
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness")
    ax.set_title("GA fitness progress")
    ax.legend()
    return [_save(fig, os.path.join(out_dir, f"{stem}_fitness.png"))]


def graph_figure(graph: "MatingGraph", out_dir: str, stem: str) -> list[str]:
    """Stratified layout: one column per tier, deterministic positions."""
    from .population import RelationshipKind, Tier

    tier_x = {Tier.A: 0.0, Tier.B: 1.0, Tier.C: 2.0}
    by_tier: dict = {Tier.A: [], Tier.B: [], Tier.C: []}
    for node in graph.nodes:
        by_tier[node.tier].append(node)
    pos: dict[int, tuple[float, float]] = {}
    for tier, members in by_tier.items():
        n = len(members)
        for i, node in enumerate(sorted(members, key=lambda m: m.id)):
            y = (i + 0.5) / n if n else 0.5
            # Small deterministic horizontal jitter so edges are readable.
            jitter = ((node.id * 2654435761) % 1000) / 1000.0 * 0.5 - 0.25
            pos[node.id] = (tier_x[tier] + jitter, y)
    fig, ax = plt.subplots(figsize=(7, 6))
    for a, b, kind in graph.edges:
        (x1, y1), (x2, y2) = pos[a], pos[b]
        style = "-" if kind is RelationshipKind.SPOUSE else "--"
        color = "#1f77b4" if kind is RelationshipKind.SPOUSE else "#d62728"
        ax.plot([x1, x2], [y1, y2], style, color=color, linewidth=0.6, alpha=0.5)
    for tier, members in by_tier.items():
        if not members:
            continue
        xs = [pos[m.id][0] for m in members]
        ys = [pos[m.id][1] for m in members]
        ax.scatter(xs, ys, s=8, label=f"tier {tier.value} ({len(members)})")
    ax.set_xticks([0, 1, 2])
    ax.set_xticklabels(["A", "B", "C"])
    ax.set_yticks([])
    ax.set_title(f"Mating graph at step {graph.step} (solid=spouse, dashed=companion)")
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(False)
    return [_save(fig, os.path.join(out_dir, f"{stem}_graph.png"))]

"""Figure rendering for judgment and lint reports.

Figures are written to files next to the delimited/structured output; they are
a reporting convenience and never feed back into judging.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .model import Judgment
from .policy import ConflictReport

_CLASS_COLORS = {
    "wrong": "#c0392b",
    "tragedy": "#7f8c8d",
    "neutral": "#bdc3c7",
    "complex": "#8e44ad",
}


def render_judgment_figures(judgment: Judgment, outdir: str | Path, stem: str) -> list[Path]:
    """Write a per-dyad wrongness chart and a dyad-factor chart; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    records = judgment.dyad_records

    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(records) + 2), 3.5))
    labels = [r.edge_id for r in records]
    values = [r.wrongness for r in records]
    colors = [_CLASS_COLORS[r.classification.value] for r in records]
    ax.bar(range(len(records)), values, color=colors)
    ax.set_xticks(range(len(records)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("wrongness")
    ax.set_title(f"per-dyad wrongness (total {judgment.total_wrongness:.4g})")
    fig.tight_layout()
    path = outdir / f"{stem}_wrongness.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(max(4.0, 1.6 * len(records) + 2), 3.5))
    width = 0.25
    xs = range(len(records))
    ax.bar([x - width for x in xs], [r.a_final for r in records], width,
           label="intentionality", color="#2980b9")
    ax.bar(list(xs), [r.p_final for r in records], width,
           label="vulnerability", color="#27ae60")
    ax.bar([x + width for x in xs], [r.h for r in records], width,
           label="causality", color="#f39c12")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_title("final dyad factors")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / f"{stem}_factors.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written


def render_conflict_figures(reports: list[ConflictReport], outdir: str | Path,
                            stem: str) -> list[Path]:
    """Write one priority chart covering every detected conflict."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(max(4.0, 1.5 * max(1, len(reports)) + 2), 3.5))
    labels: list[str] = []
    values: list[float] = []
    colors: list[str] = []
    palette = {"bottleneck": "#c0392b", "authority_paradox": "#8e44ad",
               "stakeholder_intersection": "#f39c12"}
    for index, report in enumerate(reports, start=1):
        for entry in report.priority:
            labels.append(f"#{index} {entry.obligation_id}")
            values.append(entry.wrongness)
            colors.append(palette[report.kind.value])
    ax.bar(range(len(values)), values, color=colors)
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("dyad wrongness")
    ax.set_title(f"conflict priorities ({len(reports)} conflict(s))")
    fig.tight_layout()
    path = Path(outdir) / f"{stem}_conflicts.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]

"""Figures for the compare report, rendered to files with the Agg backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .compare import CLASSES, EQ_ALL, HEADINGS, StatsReport  # noqa: E402
from .patterns import PATTERNS  # noqa: E402


def _stacked(ax, rows, keys, values, labels):
    names = [r.name for r in rows]
    bottom = [0.0] * len(rows)
    for key, label in zip(keys, labels):
        heights = [values(r, key) for r in rows]
        ax.bar(names, heights, bottom=bottom, label=label)
        bottom = [b + h for b, h in zip(bottom, heights)]
    ax.set_ylim(0, 100)
    ax.set_ylabel("% of PoIs")
    ax.legend(fontsize=7, loc="upper right")
    ax.tick_params(axis="x", labelrotation=30, labelsize=7)


def _pct(part, total):
    return 100.0 * part / total if total else 0.0


def plot_classes(report: StatsReport, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    rows = [*report.rows, report.total]
    _stacked(ax, rows, CLASSES, lambda r, c: _pct(r.counts[c], r.total), [HEADINGS[c] for c in CLASSES])
    ax.set_title("Pointee-relation classes per program")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_patterns(report: StatsReport, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    rows = [*report.rows, report.total]
    _stacked(ax, rows, PATTERNS, lambda r, p: _pct(r.patterns[p], r.counts[EQ_ALL]), list(PATTERNS))
    ax.set_title("Code patterns among PoIs where all analyses agree")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_timing(timings: list, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    engines = ("fis", "fs", "cs")
    width = 0.8 / len(engines)
    for i, e in enumerate(engines):
        xs = [j + i * width for j in range(len(timings))]
        ax.bar(xs, [t.median(e) or 0.0 for t in timings], width=width, label=e.upper())
    ax.set_xticks([j + width for j in range(len(timings))], [t.program for t in timings],
                  rotation=30, fontsize=7)
    ax.set_yscale("symlog", linthresh=1e-4)
    ax.set_ylabel("median seconds")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_all(report: StatsReport, out_dir: str | Path, timings: list | None = None) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [plot_classes(report, out / "classes.png"), plot_patterns(report, out / "patterns.png")]
    if timings:
        paths.append(plot_timing(timings, out / "timing.png"))
    return paths

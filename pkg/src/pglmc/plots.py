"""Boxplot figures for result tables.

Renders one figure per measure, grouping the per-replication values by
method, and writes them next to the delimited output so a report directory
is self-contained. PNG metadata is stripped so reruns with equal inputs
produce byte-identical files.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

MEASURE_LABELS = (
    ("ccr", "correct classification rate"),
    ("mwe", "mean within-group error"),
    ("angle_deg", "angle to optimal direction (degrees)"),
    ("intercept_dev", "intercept deviation"),
)


def render_measure_boxplots(rows, out_dir, stem: str = "results") -> list[Path]:
    """One boxplot file per measure present in ``rows``.

    ``rows`` are result-table rows (dicts); missing measures (empty cells)
    are skipped per method, and a measure nobody reports produces no file.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    methods: list[str] = []
    for row in rows:
        if row["method"] not in methods:
            methods.append(row["method"])
    written = []
    for key, label in MEASURE_LABELS:
        series = []
        names = []
        for method in methods:
            values = [
                float(row[key])
                for row in rows
                if row["method"] == method and row[key] is not None
            ]
            if values:
                series.append(values)
                names.append(method)
        if not series:
            continue
        fig, ax = plt.subplots(figsize=(2.0 + 1.4 * len(series), 3.8))
        ax.boxplot(series)
        ax.set_xticks(range(1, len(names) + 1))
        ax.set_xticklabels(names)
        ax.set_ylabel(label)
        ax.grid(axis="y", alpha=0.3)
        fig.tight_layout()
        path = out / f"{stem}_{key}.png"
        fig.savefig(path, dpi=150, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    return written

"""Rendering an evaluation into files: JSON, CSV, and figures.

The JSON report is the machine-readable record, the CSV is the per-class
table for spreadsheet work, and the two PNG figures summarize the same
numbers visually. All writers are pure functions of the report object so
a rerun over the same model and data produces the same files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Mapping

from .evaluate import EvaluationReport


def write_report_json(
    report: EvaluationReport, path: Path, extra: Mapping | None = None
) -> None:
    payload = report.as_dict()
    if extra:
        payload.update(extra)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_per_class_csv(report: EvaluationReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "frequency", "misclassified", "rate"])
        for row in report.per_class:
            writer.writerow([row.class_code, row.frequency, row.misclassified, f"{row.rate:.6f}"])


def render_figures(report: EvaluationReport, out_dir: Path) -> list[Path]:
    """Write accuracy and per-class figures as PNG files, return their paths."""
    import logging

    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    # class codes are digit strings plotted as categories; matplotlib logs an
    # INFO suggestion about numeric conversion on every bar chart otherwise
    logging.getLogger("matplotlib.category").setLevel(logging.WARNING)

    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []

    ks = sorted(report.accuracies)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([str(k) for k in ks], [report.accuracies[k] for k in ks], color="#4878a8")
    ax.set_xlabel("k")
    ax.set_ylabel("top-k accuracy")
    ax.set_ylim(0.0, 1.0)
    ax.set_title(f"Suggestion accuracy over {report.n_documents} documents")
    for i, k in enumerate(ks):
        ax.annotate(
            f"{report.accuracies[k]:.3f}",
            (i, report.accuracies[k]),
            ha="center",
            va="bottom",
            fontsize=8,
        )
    fig.tight_layout()
    acc_path = out_dir / "topk_accuracy.png"
    fig.savefig(acc_path, dpi=120)
    plt.close(fig)
    paths.append(acc_path)

    fig, ax = plt.subplots(figsize=(6, 4))
    freqs = [row.frequency for row in report.per_class]
    rates = [row.rate for row in report.per_class]
    ax.scatter(freqs, rates, s=18, color="#a85448", alpha=0.8)
    ax.set_xlabel("class frequency in evaluated set")
    ax.set_ylabel("misclassification rate")
    ax.set_ylim(-0.05, 1.05)
    corr = report.frequency_rate_correlation
    title = "Frequency vs misclassification rate"
    if corr is not None:
        title += f" (r = {corr:.2f})"
    ax.set_title(title)
    fig.tight_layout()
    rate_path = out_dir / "class_rates.png"
    fig.savefig(rate_path, dpi=120)
    plt.close(fig)
    paths.append(rate_path)

    return paths


def format_table(report: EvaluationReport, max_rows: int = 20) -> str:
    """Human-readable summary for the terminal."""
    lines = [f"documents evaluated: {report.n_documents}"]
    for k in sorted(report.accuracies):
        lines.append(f"top-{k} accuracy: {report.accuracies[k]:.4f}")
    corr = report.frequency_rate_correlation
    lines.append(
        "frequency/misclassification correlation: "
        + (f"{corr:.4f}" if corr is not None else "undefined")
    )
    lines.append("")
    lines.append(f"{'class':>6} {'freq':>6} {'missed':>7} {'rate':>7}")
    rows = sorted(report.per_class, key=lambda r: -r.frequency)[:max_rows]
    for row in rows:
        lines.append(
            f"{row.class_code:>6} {row.frequency:>6} {row.misclassified:>7} {row.rate:>7.3f}"
        )
    if len(report.per_class) > max_rows:
        lines.append(f"... {len(report.per_class) - max_rows} more classes in the CSV")
    return "\n".join(lines)

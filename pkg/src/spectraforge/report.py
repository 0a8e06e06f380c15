"""Report rendering: delimited outputs plus matplotlib figures on disk."""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .metrics import EvalReport


def write_loss_csv(path: str, history: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "test_loss"])
        for entry in history:
            writer.writerow(
                [entry["epoch"], repr(entry["train_loss"]), repr(entry.get("test_loss", ""))]
            )


def plot_loss_curve(path: str, history: list[dict], title: str = "training loss") -> None:
    epochs = [e["epoch"] for e in history]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(epochs, [e["train_loss"] for e in history], label="train")
    if history and "test_loss" in history[0]:
        ax.semilogy(epochs, [e["test_loss"] for e in history], label="test")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report_csv(path: str, reports: dict[str, EvalReport]) -> None:
    keys = [
        "mse",
        "mse_region",
        "mse_region_complement",
        "enn",
        "em_lt_enn",
        "area",
        "area_region",
        "metric",
        "metric_region",
        "align",
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method"] + keys)
        for label, rep in reports.items():
            writer.writerow([label] + [repr(getattr(rep, k)) for k in keys])


def plot_report_bars(path: str, reports: dict[str, EvalReport]) -> None:
    """Scaled metric columns as grouped bars, one group per measure."""
    keys = ["mse", "mse_region", "mse_region_complement", "enn", "area", "metric", "align"]
    labels = list(reports)
    fig, ax = plt.subplots(figsize=(9, 4.5))
    x = np.arange(len(keys), dtype=float)
    width = 0.8 / max(len(labels), 1)
    for j, label in enumerate(labels):
        rep = reports[label]
        vals = [getattr(rep, k) / rep.scales.get(k, 1.0) for k in keys]
        ax.bar(x + j * width, vals, width, label=label)
    scale_notes = [f"{k}\n(x{reports[labels[0]].scales.get(k, 1.0):g})" for k in keys]
    ax.set_xticks(x + 0.4 - width / 2)
    ax.set_xticklabels(scale_notes, fontsize=8)
    ax.set_yscale("log")
    ax.set_ylabel("scaled error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_model_vs_baseline(path: str, report: EvalReport, label: str) -> None:
    """Per-test-item model MSE against the retrieval baseline."""
    model_mse = np.asarray(report.meta.get("per_item_mse", []))
    enn_mse = np.asarray(report.meta.get("per_item_enn", []))
    if model_mse.size == 0:
        return
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.loglog(enn_mse, model_mse, "o", markersize=4, alpha=0.7)
    lo = min(model_mse.min(), enn_mse.min())
    hi = max(model_mse.max(), enn_mse.max())
    ax.loglog([lo, hi], [lo, hi], "k--", linewidth=1, label="parity")
    ax.set_xlabel("retrieval baseline MSE")
    ax.set_ylabel("model MSE")
    ax.set_title(f"{label}: below the line beats the baseline")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_evaluation(out_dir: str, reports: dict[str, EvalReport]) -> list[str]:
    """Write report.json/.txt/.csv and the figures; returns written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for label, rep in reports.items():
        p = os.path.join(out_dir, f"report_{label}.json")
        rep.save(p)
        written.append(p)
    txt = os.path.join(out_dir, "report.txt")
    with open(txt, "w") as fh:
        for label, rep in reports.items():
            fh.write(rep.table(label) + "\n\n")
    written.append(txt)
    csv_path = os.path.join(out_dir, "report.csv")
    write_report_csv(csv_path, reports)
    written.append(csv_path)
    bars = os.path.join(out_dir, "metrics.png")
    plot_report_bars(bars, reports)
    written.append(bars)
    for label, rep in reports.items():
        fig_path = os.path.join(out_dir, f"baseline_{label}.png")
        plot_model_vs_baseline(fig_path, rep, label)
        written.append(fig_path)
    return written

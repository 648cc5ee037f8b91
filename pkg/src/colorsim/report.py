"""Report emission: JSON document, flat CSV of per-round metrics, and
optional matplotlib figures rendered next to them."""

from __future__ import annotations

import json
import os

from .engine import RoundRecord, RunReport


def write_json(report: RunReport, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")


def write_csv(report: RunReport, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(RoundRecord.CSV_FIELDS + "\n")
        for rec in report.rounds:
            fh.write(rec.csv_row() + "\n")


def render_figures(report: RunReport, out_dir: str, stem: str = "run") -> list[str]:
    """Render phase-occupancy and per-round metric figures as PNG files.

    Returns the written paths.  Uses the Agg backend; no display needed.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rounds = [r.round for r in report.rounds]
    if not rounds:
        return []
    written = []

    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(rounds, [r.i1 for r in report.rounds], label="Linial range", lw=1.2)
    ax.plot(rounds, [r.i2 for r in report.rounds], label="quadratic range", lw=1.2)
    ax.plot(rounds, [r.i3 for r in report.rounds], label="reduction range", lw=1.2)
    ax.plot(
        rounds,
        [r.in_palette for r in report.rounds],
        label="in [delta+1]",
        lw=1.8,
        color="black",
    )
    marker = report.completion_round or report.stabilization_round
    if marker is not None:
        ax.axvline(marker, color="grey", ls="--", lw=0.8)
    ax.set_xlabel("round")
    ax.set_ylabel("vertices")
    ax.set_title(f"{report.variant} run: phase occupancy")
    ax.legend(loc="center right", fontsize=8)
    fig.tight_layout()
    path = os.path.join(out_dir, f"{stem}_phases.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    axes[0].plot(rounds, [r.changed for r in report.rounds], lw=1.0, label="changed")
    axes[0].plot(rounds, [r.violations for r in report.rounds], lw=1.0, label="violations")
    if report.variant == "ss":
        axes[0].plot(rounds, [r.resets for r in report.rounds], lw=1.0, label="resets")
        axes[0].plot(rounds, [r.mutations for r in report.rounds], lw=1.0, label="mutations")
    axes[0].set_ylabel("count")
    axes[0].legend(fontsize=8)
    axes[1].plot(rounds, [(r.defect_a or 0) for r in report.rounds], lw=1.0, label="a-defect")
    axes[1].plot(rounds, [(r.arbdefect or 0) for r in report.rounds], lw=1.0, label="arbdefect")
    axes[1].plot(rounds, [(r.max_c or 0) for r in report.rounds], lw=1.0, label="max c")
    axes[1].set_xlabel("round")
    axes[1].set_ylabel("value")
    axes[1].legend(fontsize=8)
    fig.suptitle(f"{report.variant} run: per-round metrics")
    fig.tight_layout()
    path = os.path.join(out_dir, f"{stem}_metrics.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


def write_report(
    report: RunReport, out_dir: str, stem: str = "run", figures: bool = False
) -> list[str]:
    """Write report.json + rounds.csv (+ figures) into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    json_path = os.path.join(out_dir, f"{stem}_report.json")
    write_json(report, json_path)
    written.append(json_path)
    csv_path = os.path.join(out_dir, f"{stem}_rounds.csv")
    write_csv(report, csv_path)
    written.append(csv_path)
    if figures:
        written.extend(render_figures(report, out_dir, stem))
    return written

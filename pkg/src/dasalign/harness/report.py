"""CSV emission and figure rendering for experiment results."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FIG3_COLUMNS = ["T", "method", "p_mis_sys", "p_mis_sys_ci", "p_mis_user_mean", "trials"]
FIG4_COLUMNS = ["method", "rate_bps_hz", "cdf"]

STYLE = {
    "TSSA": dict(color="tab:red", marker="o"),
    "OSES-distributed": dict(color="tab:blue", marker="s"),
    "OSES-centralized": dict(color="tab:green", marker="^"),
}


def write_csv(path, rows, columns=None) -> Path:
    path = Path(path)
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return path


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def plot_misalignment(summary, path) -> Path:
    """System misalignment probability against pilot length, one curve per method."""
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    methods = []
    for row in summary:
        if row["method"] not in methods:
            methods.append(row["method"])
    for method in methods:
        pts = sorted((r["T"], r["p_mis_sys"], r["p_mis_sys_ci"]) for r in summary if r["method"] == method)
        t, p, ci = zip(*pts)
        ax.errorbar(t, p, yerr=ci, label=method, capsize=2, **STYLE.get(method, {}))
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("pilot length T (symbols)")
    ax.set_ylabel("system misalignment probability")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_rate_cdf(cdf_rows, path, pilot_length=None) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    by_method: dict[str, list] = {}
    for row in cdf_rows:
        by_method.setdefault(row["method"], []).append((row["rate_bps_hz"], row["cdf"]))
    for method, pts in by_method.items():
        x, y = zip(*pts)
        ax.step(x, y, where="post", label=method, color=STYLE.get(method, {}).get("color"))
    ax.set_xlabel("user rate (bits/s/Hz)")
    ax.set_ylabel("empirical CDF")
    if pilot_length is not None:
        ax.set_title(f"T = {pilot_length}")
    ax.set_ylim(0, 1)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)

"""SVG line plots rendered from persisted sweep and scaling output."""

from __future__ import annotations

import math
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sweep import read_points  # noqa: E402

FAMILIES = {
    "discord": "quantum discord",
    "classical": "classical correlation",
    "mutual_info": "mutual information",
    "concurrence_scaled": "scaled concurrence",
    "d_discord_d_lambda": "d discord / d lambda",
}

# stable element ids and no timestamp, so identical data gives identical files
plt.rcParams["svg.hashsalt"] = "collective-discord"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_sweep(csv_path: str, out_dir: str) -> list[str]:
    """One figure per quantity, one line per (model, N); returns written paths."""
    rows = read_points(csv_path)
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(csv_path))[0]
    written = []
    for key, label in FAMILIES.items():
        groups = defaultdict(list)
        for r in rows:
            if r[key] is not None:
                groups[(r["model"], r["N"] or 0)].append((r["lambda"], r[key]))
        if not groups:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        for (model, n), pts in sorted(groups.items()):
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], label=model if not n else f"{model} N={n}")
        ax.set_xlabel("lambda")
        ax.set_ylabel(label)
        ax.legend(fontsize=8)
        fig.tight_layout()
        written.append(_save(fig, os.path.join(out_dir, f"{stem}_{key}.svg")))
    return written


def plot_scaling(report: dict, out_dir: str, stem: str = "scaling") -> list[str]:
    """Log-log plot of D(lambda_c) and log2-linear plot of the derivative extrema."""
    os.makedirs(out_dir, exist_ok=True)
    sizes = report["sizes"]
    ns = [s["n_atoms"] for s in sizes]
    written = []

    fit = report["power_law"]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(ns, [s["discord_critical"] for s in sizes], "o", label="data")
    ax.loglog(ns, [fit["coefficient"] * n ** fit["exponent_or_slope"] for n in ns], "-",
              label=f"slope {fit['exponent_or_slope']:.3f}")
    ax.set_xlabel("N")
    ax.set_ylabel("discord at lambda_c")
    ax.legend(fontsize=8)
    fig.tight_layout()
    written.append(_save(fig, os.path.join(out_dir, f"{stem}_critical_discord.svg")))

    fit = report["log2_linear"]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogx(ns, [s["extremum_value"] for s in sizes], "o", base=2, label="data")
    ax.semilogx(ns, [fit["exponent_or_slope"] * math.log2(n) + fit["intercept"] for n in ns], "-", base=2,
                label=f"slope {fit['exponent_or_slope']:.4f}")
    ax.set_xlabel("N")
    ax.set_ylabel("extremum of d discord / d lambda")
    ax.legend(fontsize=8)
    fig.tight_layout()
    written.append(_save(fig, os.path.join(out_dir, f"{stem}_derivative_extremum.svg")))
    return written


"""Optional figure output for the CLI (matplotlib, Agg backend, imported lazily)."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_path(x: np.ndarray, betas: Sequence[float], rows: Sequence[np.ndarray], out: str,
              title: str = "", discrete: bool = False) -> None:
    """One curve (or stem set) per beta."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    cmap = plt.get_cmap("viridis")
    for i, (b, v) in enumerate(zip(betas, rows)):
        color = cmap(i / max(len(betas) - 1, 1))
        if discrete:
            ax.plot(x, v, marker="o", linestyle="--", color=color, label=f"beta={b:g}")
        else:
            ax.plot(x, v, color=color, label=f"beta={b:g}")
    ax.set_xlabel("x")
    ax.set_ylabel("unnormalized density")
    if title:
        ax.set_title(title)
    if len(betas) <= 12:
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out, dpi=120, metadata={"Software": None})
    plt.close(fig)


def plot_divergences(records: Sequence[dict], out: str) -> None:
    """Values grouped by kind; a swept parameter goes on the x axis, otherwise bars."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    groups: dict[str, list[dict]] = {}
    for r in records:
        groups.setdefault(r["kind"], []).append(r)
    bars = []
    for kind, recs in groups.items():
        swept = [k for k in recs[0]["params"] if len({str(r["params"].get(k)) for r in recs}) > 1]
        if len(recs) > 1 and len(swept) == 1:
            key = swept[0]
            xs = [float(r["params"][key]) for r in recs]
            ax.plot(xs, [r["value"] for r in recs], marker="o", label=f"{kind} vs {key}")
        else:
            bars.extend(recs)
    if bars:
        labels = [r["kind"] + "".join(f" {k}={v}" for k, v in r["params"].items() if not isinstance(v, dict))
                  for r in bars]
        ax.bar(np.arange(len(bars)), [r["value"] for r in bars], tick_label=labels)
        ax.tick_params(axis="x", labelrotation=45)
    ax.set_ylabel("divergence")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out, dpi=120, metadata={"Software": None})
    plt.close(fig)

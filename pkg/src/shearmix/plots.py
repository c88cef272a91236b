"""Log-log decay plots rendered to standalone SVG files."""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def plot_norm_series(path, series_list, N: int, title: str = "") -> None:
    """All series on one log-log axis with the reference slope -1/(N+1).

    series_list: iterables of (label, times, values).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    t_all = []
    for label, ts, vs in series_list:
        ts = np.asarray(ts, dtype=float)
        vs = np.asarray(vs, dtype=float)
        keep = (ts > 0) & (vs > 0)
        if not keep.any():
            continue
        ax.loglog(ts[keep], vs[keep], marker="o", ms=3, lw=1.0, label=label)
        t_all.append(ts[keep])
    if t_all:
        ts = np.concatenate(t_all)
        t0, t1 = ts.min(), ts.max()
        alpha = 1.0 / (N + 1)
        ref = np.array([t0, t1])
        anchor = max(v for _, _, vs in series_list
                     for v in np.asarray(vs)[np.asarray(vs) > 0][:1])
        ax.loglog(ref, anchor * (ref / t0) ** (-alpha), "k--", lw=1.0,
                  label=f"slope -1/{N + 1}")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)

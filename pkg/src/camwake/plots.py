"""SVG ECDF step plots and the learned POD curve."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import ecdf  # noqa: E402

LABELS = {"always": "always", "rnd": "rnd", "gt": "gt", "s2gpr": "S$^2$GPR"}
METRIC_AXES = {
    "acc": ("Accuracy", "ecdf_acc.svg"),
    "e_total_j": ("Total energy [J]", "ecdf_energy.svg"),
    "ce": ("Confusion-energy", "ecdf_ce.svg"),
}


def _save(fig, path):
    # fixed hash salt and no date keep the SVG bytes reproducible
    with matplotlib.rc_context({"svg.hashsalt": "camwake"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_ecdfs(rows, out_dir, policies=None) -> list:
    out_dir = Path(out_dir)
    policies = policies or sorted({r["policy"] for r in rows})
    written = []
    for metric, (label, name) in METRIC_AXES.items():
        fig, ax = plt.subplots(figsize=(4.5, 3.5))
        for p in policies:
            vals = [r[metric] for r in rows if r["policy"] == p]
            if not vals:
                continue
            x, f = ecdf(vals).points()
            # prepend a zero step so each curve starts at probability 0
            ax.step(np.r_[x[0], x], np.r_[0.0, f], where="post", label=LABELS.get(p, p))
        ax.set_xlabel(label)
        ax.set_ylabel("ECDF")
        ax.set_ylim(0, 1.02)
        ax.grid(alpha=0.3)
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        _save(fig, out_dir / name)
        written.append(out_dir / name)
    return written


def plot_pod(model, dataset, path, truth=None) -> None:
    """Learned POD against RSSI with the training labels; ``truth`` is an optional callable."""
    x = dataset.inputs
    grid = np.linspace(x.min(), x.max(), 300)
    pred = model.predict(grid)
    sd = np.sqrt(pred.variance)
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.plot(x, dataset.labels, "k.", ms=2, alpha=0.4, label="empirical POD")
    ax.plot(grid, pred.mean, "g-", label="GP mean")
    ax.fill_between(grid, pred.mean - 2 * sd, pred.mean + 2 * sd, color="g", alpha=0.15)
    if truth is not None:
        ax.plot(grid, truth(grid), "r--", lw=1, label="true POD")
    ax.set_xlabel("RSSI [dBm]")
    ax.set_ylabel("POD")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path)

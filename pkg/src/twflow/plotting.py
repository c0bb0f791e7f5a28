"""Render experiment CSV rows as PNG figures (headless Agg backend)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .harness import (PRESET_CDP, PRESET_CONVERGE, PRESET_SNR, PRESET_SUCCESS)

_STYLES = {
    "twf": dict(color="tab:red", marker="o"),
    "itwf": dict(color="black", marker="s"),
    "itwf_with": dict(color="tab:blue", marker="^"),
    "itwf_const": dict(color="black", marker="s"),
    "itwf_dim": dict(color="tab:blue", marker="^"),
}


def _series(rows, xkey, ykey):
    by_alg = {}
    for row in rows:
        by_alg.setdefault(row["algorithm"], ([], []))
        xs, ys = by_alg[row["algorithm"]]
        xs.append(row[xkey])
        ys.append(row[ykey])
    return by_alg


def _plot(rows, xkey, ykey, xlabel, ylabel, path, logy=False, logx=False):
    fig, ax = plt.subplots(figsize=(6, 4))
    for alg, (xs, ys) in _series(rows, xkey, ykey).items():
        ax.plot(xs, ys, label=alg, markersize=4,
                **_STYLES.get(alg, dict(marker="x")))
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_figure(preset, rows, path):
    """Write the one figure that goes with a preset's CSV rows."""
    if preset == PRESET_SUCCESS:
        _plot(rows, "m_over_n", "success_rate", "m / n",
              "empirical success rate", path)
    elif preset in (PRESET_CONVERGE, PRESET_CDP):
        _plot(rows, "pass", "rel_error", "passes through the data",
              "relative RMSE", path, logy=True)
    elif preset == PRESET_SNR:
        _plot(rows, "snr", "final_rel_mse", "SNR",
              "final relative MSE", path, logy=True, logx=True)
    else:
        raise ValueError(f"unknown preset {preset!r}")

"""Static figures for sweep results."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

# fixed ids and no timestamp keep SVG output byte-stable
_RC = {
    "svg.hashsalt": "pfa-sweep",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
}


def plot_sweep(records, path, samples, figsize=(5.0, 3.6)):
    """Prediction error against noise dimension for one sample count.

    One polyline per ``k``; ``k = 4`` is dashed for comparison with the
    reference figures. The relaxed lower bound is a red horizontal line.
    """
    recs = [r for r in records if r.samples == samples]
    if not recs:
        raise ValueError("no records for samples=%d" % samples)
    ks = sorted({r.k for r in recs})
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=figsize)
        cmap = plt.get_cmap("viridis", max(len(ks), 2))
        for i, k in enumerate(ks):
            pts = sorted((r.noise_dim, r.mean_err) for r in recs if r.k == k)
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker=".", color=cmap(i), linestyle="--" if k == 4 else "-",
                    linewidth=1.0, label="k=%d" % k)
        ax.axhline(recs[0].lower_bound, color="red", linewidth=1.0, label="lower bound")
        ax.set_xlabel("added noise dimensions")
        ax.set_ylabel("prediction error")
        ax.set_title("%d samples, %d runs" % (samples, recs[0].runs))
        ax.legend(ncol=2, frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)

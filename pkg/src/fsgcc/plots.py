"""SVG figures via matplotlib (Agg); output is byte-stable for fixed data."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SVG_META = {"Date": None, "Creator": None}
plt.rcParams["svg.hashsalt"] = "fsgcc"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_traces(path, lag, traces, tau_true=None, title=None, xlim=None):
    """One panel per named correlation trace."""
    fig, axes = plt.subplots(len(traces), 1, figsize=(6, 1.8 * len(traces)), sharex=True,
                             squeeze=False)
    for ax, (name, y) in zip(axes[:, 0], traces.items()):
        ax.plot(lag, y, lw=0.8)
        if tau_true is not None:
            ax.axvline(tau_true, color="r", lw=0.6, ls="--")
        ax.set_ylabel(name)
    axes[-1, 0].set_xlabel("lag [samples]")
    if xlim:
        axes[-1, 0].set_xlim(*xlim)
    if title:
        axes[0, 0].set_title(title)
    fig.tight_layout()
    _save(fig, path)


def plot_matrix(path, R, lag, title=None, lag_window=None):
    """Magnitude, real and imaginary heatmaps of a lag-by-band matrix."""
    R = np.asarray(R)
    rows = slice(None)
    if lag_window is not None:
        rows = (lag >= -lag_window) & (lag <= lag_window)
    parts = (("magnitude", np.abs(R[rows])), ("real", R[rows].real), ("imaginary", R[rows].imag))
    fig, axes = plt.subplots(1, 3, figsize=(10, 3.4), sharey=True)
    lo, hi = lag[rows][0], lag[rows][-1]
    for ax, (name, a) in zip(axes, parts):
        ax.imshow(a, aspect="auto", origin="lower", extent=(-0.5, R.shape[1] - 0.5, lo, hi),
                  interpolation="nearest", cmap="viridis")
        ax.set_title(name)
        ax.set_xlabel("band")
    axes[0].set_ylabel("lag [samples]")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    _save(fig, path)


def plot_metric_lines(path, rows, metric, ylabel):
    """Metric vs SNR, one line per (method, refl).

    ``rows`` are ``(method, snr, refl, report)``; absent cells are skipped.
    """
    fig, ax = plt.subplots(figsize=(5, 3.4))
    keys = sorted({(m, r) for m, _, r, _ in rows})
    for m, refl in keys:
        pts = [(s, getattr(rep, metric)) for mm, s, r, rep in rows
               if mm == m and r == refl and rep is not None and getattr(rep, metric) is not None]
        if pts:
            x, y = zip(*sorted(pts))
            ax.plot(x, y, marker="o", lw=1, label=f"{m}, refl={refl:g}")
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, path)


def plot_srp_map(path, srp_map, mics, source, title=None):
    """Planar M-SRP map with microphones (dots) and the true source (circle)."""
    pts = srp_map.grid.points
    xs = np.unique(pts[:, 0])
    ys = np.unique(pts[:, 1])
    img = srp_map.scores.reshape(len(xs), len(ys)).T
    res = srp_map.grid.resolution
    fig, ax = plt.subplots(figsize=(4.2, 4.6))
    ax.imshow(img, origin="lower", cmap="viridis", interpolation="nearest",
              extent=(xs[0] - res / 2, xs[-1] + res / 2, ys[0] - res / 2, ys[-1] + res / 2))
    m = np.asarray(mics)
    ax.plot(m[:, 0], m[:, 1], "k.", ms=8)
    ax.plot(source[0], source[1], "o", mfc="none", mec="w", ms=12)
    ax.plot(*srp_map.argmax_point[:2], "r+", ms=10)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)

"""Optional PNG figures rendered from a report's tables.

matplotlib is imported lazily so the data path never needs it; install
the ``plot`` extra to use :func:`render_figures`.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


class PlottingUnavailable(RuntimeError):
    """matplotlib is not installed."""


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise PlottingUnavailable("figures need matplotlib: pip install 'artifact[plot]'") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams.update({"font.size": 9, "axes.spines.top": False, "axes.spines.right": False,
                         "figure.dpi": 120})
    return plt


def _column(rows, header, name, conv=float):
    i = header.index(name)
    return np.array([conv(r[i]) for r in rows])


def _landscape(plt, header, rows):
    q, p = _column(rows, header, "qT"), _column(rows, header, "pT")
    norm = _column(rows, header, "norm")
    qs, ps = np.unique(q), np.unique(p)
    grid = norm.reshape(len(qs), len(ps))
    fig, ax = plt.subplots(figsize=(4.5, 3.8))
    im = ax.pcolormesh(qs, ps, np.log10(np.maximum(grid, 1e-16)).T, shading="nearest")
    fig.colorbar(im, ax=ax, label="log10 minimal residual norm")
    ax.set_xlabel("final q")
    ax.set_ylabel("final p")
    return fig


def _variation_sweep(plt, header, rows):
    a, v, n = (_column(rows, header, c) for c in ("alpha", "min_abs_dS", "grid_N"))
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    for alpha in np.unique(a):
        m = a == alpha
        ax.loglog(n[m], np.maximum(v[m], 1e-18), "o-", label=f"alpha = {alpha:g}")
    ax.set_xlabel("time steps N")
    ax.set_ylabel("min |dS| over variations")
    ax.legend(frameon=False)
    return fig


def _period_shifts(plt, header, rows):
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    systems = [r[header.index("system")] for r in rows]
    k, shift = _column(rows, header, "k"), _column(rows, header, "shift")
    for name in dict.fromkeys(systems):
        m = np.array([s == name for s in systems])
        ax.plot(k[m], shift[m], "o-", label=name)
    ax.set_xlabel("extra wraps k")
    ax.set_ylabel("action shift")
    ax.legend(frameon=False)
    return fig


def _profile(plt, header, rows):
    t, r = _column(rows, header, "t"), _column(rows, header, "residual")
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.semilogy(t, np.maximum(r, 1e-18))
    ax.set_xlabel("t")
    ax.set_ylabel("normalised orbit residual")
    return fig


def _convergence(plt, header, rows):
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    names = [r[header.index("study")] for r in rows]
    h, e = _column(rows, header, "h"), _column(rows, header, "error")
    for name in dict.fromkeys(names):
        m = np.array([s == name for s in names])
        ax.loglog(h[m], e[m], "o-", label=name)
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.legend(frameon=False, fontsize=7)
    return fig


def _torus_bands(plt, header, rows):
    n, th = _column(rows, header, "n"), _column(rows, header, "theta")
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.plot(n, th, "o")
    ax.set_xlabel("winding n")
    ax.set_ylabel("theta*")
    return fig


RENDERERS = {
    "landscape.csv": _landscape,
    "variation_sweep.csv": _variation_sweep,
    "period_shifts.csv": _period_shifts,
    "maupertuis_profile.csv": _profile,
    "convergence.csv": _convergence,
    "torus_bands.csv": _torus_bands,
}


def render_figures(report, out_dir):
    """Write one PNG per recognised table; returns the written paths."""
    plt = _pyplot()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for filename, (header, rows) in sorted(report.tables.items()):
        render = RENDERERS.get(filename)
        if render is None or not rows:
            continue
        fig = render(plt, header, rows)
        fig.tight_layout()
        path = out_dir / (Path(filename).stem + ".png")
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written

"""
Figure rendering for CLI reports.

matplotlib is an optional dependency; it is only imported when a figure is
actually requested.
"""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update(
        {
            "font.size": 10,
            "axes.labelsize": 10,
            "legend.fontsize": 8,
            "figure.dpi": 100,
            "savefig.dpi": 150,
            "axes.grid": True,
            "grid.alpha": 0.3,
            # Fixed metadata keeps reruns byte-stable where the backend allows.
            "svg.hashsalt": "chermnykh",
        }
    )
    return plt


def available() -> bool:
    try:
        import matplotlib  # noqa: F401
    except ImportError:
        return False
    return True


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.stem}.", suffix=path.suffix)
    os.close(fd)
    fig.savefig(tmp, metadata={"Software": None} if path.suffix == ".png" else None)
    os.replace(tmp, path)
    return path


def plot_points(params, points, path, title=None):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 5))
    ax.plot([-params.mu], [0.0], "o", color="orange", ms=10, label="$m_1$")
    ax.plot([1.0 - params.mu], [0.0], "o", color="tab:blue", ms=6, label="$m_2$")
    for pt in points:
        ax.plot(pt.x, pt.y, "k.", ms=8)
        ax.annotate(pt.index.value, (pt.x, pt.y), textcoords="offset points", xytext=(4, 4))
    th = np.linspace(0, 2 * math.pi, 400)
    ax.plot(np.cos(th), np.sin(th), ":", color="0.6", lw=0.8)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title or f"equilibria, mu={params.mu:g}")
    ax.legend(loc="lower left")
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_trajectory(traj, path, title=None):
    """Three panels: path relative to the start, energy and local distance vs time."""
    plt = _pyplot()
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    ax = axes[0]
    ax.plot(traj.x - traj.x[0], traj.y - traj.y[0], lw=0.7)
    ax.plot([0], [0], "k+", ms=10)
    ax.set_xlabel("x - x(0)")
    ax.set_ylabel("y - y(0)")
    ax.set_title("trajectory")
    ax = axes[1]
    ax.plot(traj.t, traj.energy - traj.energy[0], lw=0.7)
    ax.set_xlabel("t")
    ax.set_ylabel("E(t) - E(0)")
    ax.set_title(f"energy, E(0) = {traj.energy[0]:.6g}")
    ax = axes[2]
    ax.plot(traj.t, traj.r_local, lw=0.7)
    ax.set_xlabel("t")
    ax.set_ylabel("r(t)")
    ax.set_title("local distance")
    if traj.t_escape is not None:
        for a in axes[1:]:
            a.axvline(traj.t_escape, color="tab:red", ls="--", lw=0.8)
    fig.suptitle(title or f"termination: {traj.termination.value}")
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_sweep(table, t_end, path, title=None):
    """Escape time over the grid; bounded cells are drawn at ``t_end``."""
    plt = _pyplot()

    def esc(v):
        if v.failed:
            return math.nan
        if v.bounded:
            return t_end
        return v.t_escape if v.t_escape is not None else v.t_failure

    vals = np.array([esc(r.verdict) for r in table], dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if len(table.axes) == 1:
        name = table.axes[0]
        xs = [r.coords[name] for r in table]
        ax.plot(xs, vals, "o-")
        ax.axhline(t_end, color="0.5", ls=":", lw=0.8, label="t_end (bounded)")
        ax.set_xlabel(name)
        ax.set_ylabel("escape time")
        ax.legend()
    else:
        a, b = table.axes[:2]
        xa = sorted({r.coords[a] for r in table})
        xb = sorted({r.coords[b] for r in table})
        grid = vals.reshape(len(xa), len(xb))
        mesh = ax.pcolormesh(_edges(xb), _edges(xa), grid, shading="flat", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="escape time")
        ax.set_xlabel(b)
        ax.set_ylabel(a)
    ax.set_title(title or "stability sweep")
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out


def _edges(centers):
    c = np.asarray(centers, dtype=float)
    if len(c) == 1:
        return np.array([c[0] - 0.5, c[0] + 0.5])
    mid = 0.5 * (c[1:] + c[:-1])
    return np.concatenate([[2 * c[0] - mid[0]], mid, [2 * c[-1] - mid[-1]]])

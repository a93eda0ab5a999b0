"""Diagnostic figures rendered next to the text artifacts.

Everything here is headless (Agg) and deterministic: same inputs, same
pixels.  Figures are a convenience layer over the delimited files, never
a data source, so nothing reads them back.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 110


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def field_heatmap(path, grid, field, t: float) -> Path:
    """Final (or any) state as a heatmap over the product rectangle."""
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    im = ax.imshow(
        np.asarray(field).T,
        origin="lower",
        extent=(*grid.extent1, *grid.extent2),
        aspect="auto",
        cmap="viridis",
    )
    fig.colorbar(im, ax=ax, label="u")
    ax.set_xlabel("x1 (no-flow walls)")
    ax.set_ylabel("x2 (imposed values)")
    ax.set_title(f"state at t = {t:.6g}")
    return _save(fig, path)


def report_scatter(path, entries) -> Path:
    """Defect magnitude against tolerance, one marker per check entry.

    Markers below the diagonal are comfortably inside tolerance; failures
    sit above it.  Info entries carry no tolerance and plot in grey on
    the floor value.
    """
    floor = 1e-18
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    by_status = {"pass": ("tab:green", "o"), "fail": ("tab:red", "x"), "info": ("0.6", ".")}
    for status, (color, marker) in by_status.items():
        xs = [max(abs(e.defect), floor) for e in entries if e.status == status]
        ys = [max(e.tolerance, floor) for e in entries if e.status == status]
        if xs:
            ax.loglog(ys, xs, marker, color=color, label=status, alpha=0.8)
    lo, hi = floor, 1.0
    ax.loglog([lo, hi], [lo, hi], "-", color="0.8", lw=1, zorder=0)
    ax.set_xlabel("tolerance")
    ax.set_ylabel("defect magnitude")
    ax.set_title("check entries")
    ax.legend(loc="upper left", fontsize=8)
    return _save(fig, path)


def sweep_figure(path, rows) -> Path:
    """Cauchy gaps and the viscous energy along the viscosity ladder."""
    eps = [r.eps for r in rows]
    gaps = [(r.eps, r.l1_gap_next) for r in rows if r.l1_gap_next is not None]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.4, 3.6))
    if gaps:
        ax1.loglog([g[0] for g in gaps], [g[1] for g in gaps], "o-")
    ax1.set_xlabel("viscosity")
    ax1.set_ylabel("L1 gap to next run")
    ax1.set_title("vanishing-viscosity Cauchy gaps")
    ax2.loglog(eps, [max(r.eps_grad_sq, 1e-30) for r in rows], "o-", label="eps*|grad u|^2")
    ax2.loglog(eps, [max(r.bgrad_sq, 1e-30) for r in rows], "s-", label="|d2 b(u)|^2")
    ax2.set_xlabel("viscosity")
    ax2.set_ylabel("time-integrated energy")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def trace_figure(path, profile, grid) -> Path:
    """Near-wall band profiles at the final time plus the L1 gap decay."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.4, 3.6))
    for depth, bands in zip(profile.s_values, profile.profiles):
        mean_band = 0.5 * (bands[-1][0] + bands[-1][1])
        ax1.plot(grid.x2, mean_band, label=f"depth {depth:.4g}")
    ax1.set_xlabel("x2")
    ax1.set_ylabel("band average of u")
    ax1.set_title("wall-parallel profiles, final time")
    ax1.legend(fontsize=7)
    if profile.l1_gaps:
        ax2.semilogy(
            range(1, len(profile.l1_gaps) + 1),
            [max(g, 1e-30) for g in profile.l1_gaps],
            "o-",
        )
    ax2.set_xlabel("band pair")
    ax2.set_ylabel("time-integrated L1 gap")
    ax2.set_title("approach to the wall")
    fig.tight_layout()
    return _save(fig, path)


def contraction_figure(path, times, dists) -> Path:
    """L1 distance between the two runs at every sampled time."""
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.plot(times, dists, "o-")
    ax.set_xlabel("t")
    ax.set_ylabel("L1 distance")
    ax.set_title("distance between paired runs")
    ax.set_ylim(bottom=0.0)
    return _save(fig, path)

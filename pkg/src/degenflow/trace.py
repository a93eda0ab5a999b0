"""Discrete boundary-trace machinery.

Three independent representations of boundary behavior are implemented
and cross-checked: the divergence-theorem residual of a sampled vector
field (face pairing vs volume integrals), the boundary-layer band limit
of the same pairing, and the restriction of a run to inward wall
deformations whose shrinking L1 gaps witness a strong trace.  A fourth,
in the time direction, audits the t = 0 face of the space-time entropy
fields against the initial data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Grid, deformation_layers
from .solver import RunArtifacts
from .verify import CheckEntry


def _deriv_first_order_edges(f: np.ndarray, h: float) -> np.ndarray:
    """Centered derivative along the last axis, one-sided first order at
    the two edge samples."""
    out = np.empty_like(f)
    out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2.0 * h)
    out[..., 0] = (f[..., 1] - f[..., 0]) / h
    out[..., -1] = (f[..., -1] - f[..., -2]) / h
    return out


def _sample(field, grid: Grid) -> np.ndarray:
    X1, X2 = grid.centers()
    return np.asarray(field(X1, X2), dtype=float)


def divergence(F1, F2, grid: Grid) -> np.ndarray:
    """Discrete divergence of a sampled vector field, first order at the
    boundary so the residual of the divergence theorem stays one-sided."""
    d1 = np.swapaxes(
        _deriv_first_order_edges(np.swapaxes(F1, -1, -2), grid.dx1), -1, -2
    )
    d2 = _deriv_first_order_edges(F2, grid.dx2)
    return d1 + d2


def face_pairing(F1_fn, F2_fn, g_fn, grid: Grid) -> float:
    """Boundary pairing of F with g: sum over wall faces of the normal
    component times g, both taken from the nearest cell."""
    F1 = _sample(F1_fn, grid)
    F2 = _sample(F2_fn, grid)
    g = _sample(g_fn, grid)
    right = float(np.sum(F1[-1, :] * g[-1, :]) * grid.dx2)
    left = -float(np.sum(F1[0, :] * g[0, :]) * grid.dx2)
    top = float(np.sum(F2[:, -1] * g[:, -1]) * grid.dx1)
    bottom = -float(np.sum(F2[:, 0] * g[:, 0]) * grid.dx1)
    return right + left + top + bottom


def gauss_green_residual(F1_fn, F2_fn, g_fn, grid: Grid) -> float:
    """|integral of grad g . F + g div F minus the boundary pairing|.

    All derivatives are discrete (centered inside, one-sided at walls),
    so the residual measures pure discretization error: first order for
    smooth fields, zero for constant F with constant g.
    """
    F1 = _sample(F1_fn, grid)
    F2 = _sample(F2_fn, grid)
    g = _sample(g_fn, grid)
    div = divergence(F1, F2, grid)
    g1 = np.swapaxes(
        _deriv_first_order_edges(np.swapaxes(g, -1, -2), grid.dx1), -1, -2
    )
    g2 = _deriv_first_order_edges(g, grid.dx2)
    volume = float(np.sum(g1 * F1 + g2 * F2 + g * div) * grid.area)
    return abs(volume - face_pairing(F1_fn, F2_fn, g_fn, grid))


def gauss_green_refinement(F1_fn, F2_fn, g_fn, coarse: Grid, fine: Grid):
    """(coarse residual, fine residual, ratio) for a refinement pair."""
    rc = gauss_green_residual(F1_fn, F2_fn, g_fn, coarse)
    rf = gauss_green_residual(F1_fn, F2_fn, g_fn, fine)
    return rc, rf, rc / rf if rf > 0 else np.inf


def _wall_distance_and_normal(grid: Grid):
    """Per cell: distance of the center to the nearest wall and the
    inward normal of that wall (ties broken left, right, bottom, top)."""
    X1, X2 = grid.centers()
    lo1, hi1 = grid.extent1
    lo2, hi2 = grid.extent2
    dists = np.stack(
        [X1 - lo1, hi1 - X1, X2 - lo2, hi2 - X2]
    )
    nearest = np.argmin(dists, axis=0)
    m = np.min(dists, axis=0)
    normals = {
        0: (1.0, 0.0),
        1: (-1.0, 0.0),
        2: (0.0, 1.0),
        3: (0.0, -1.0),
    }
    n1 = np.choose(nearest, [normals[i][0] for i in range(4)])
    n2 = np.choose(nearest, [normals[i][1] for i in range(4)])
    return m, n1, n2


def boundary_layer_pairing(F1_fn, F2_fn, g_fn, grid: Grid, eps_list):
    """Band-integral estimates of the boundary pairing and their limit.

    For each band width eps, integrates -g (inward normal . F) / eps
    over the whole cells whose centers lie within eps of a wall, then
    linearly extrapolates the two thinnest bands to zero width.
    Returns (limit, per-eps values).
    """
    eps_list = sorted((float(e) for e in eps_list), reverse=True)
    if len(eps_list) < 2:
        raise ValueError("need at least two band widths")
    resolution = 0.5 * max(grid.dx1, grid.dx2)
    if eps_list[-1] < resolution:
        raise ValueError(
            f"band width {eps_list[-1]} below the cell resolution"
        )
    F1 = _sample(F1_fn, grid)
    F2 = _sample(F2_fn, grid)
    g = _sample(g_fn, grid)
    m, n1, n2 = _wall_distance_and_normal(grid)
    inward_flux = g * (n1 * F1 + n2 * F2)
    values = []
    for eps in eps_list:
        band = m < eps
        if not band.any():
            raise ValueError(f"band width {eps} selects no cells")
        values.append(-float(np.sum(inward_flux[band]) * grid.area) / eps)
    e1, e2 = eps_list[-1], eps_list[-2]
    v1, v2 = values[-1], values[-2]
    limit = (e2 * v1 - e1 * v2) / (e2 - e1)
    return limit, values


@dataclass(frozen=True)
class TraceProfile:
    """Wall-deformation restrictions of a run and their L1 gaps.

    profiles[i] has shape (n_times, 2, n2): the run restricted to the
    two cell columns at depth s_values[i], low wall first.  l1_gaps[i]
    is the space-time L1 distance between consecutive depths, trapezoid
    in time; the last profile (smallest depth) estimates the wall
    trace.
    """

    s_values: tuple
    times: tuple
    profiles: tuple
    l1_gaps: tuple

    def __post_init__(self):
        if list(self.s_values) != sorted(self.s_values, reverse=True):
            raise ValueError("deformation depths must strictly decrease")
        if len(set(self.s_values)) != len(self.s_values):
            raise ValueError("deformation depths must strictly decrease")

    @property
    def wall_estimate(self) -> np.ndarray:
        return self.profiles[-1]


def extract_trace_profile(
    grid: Grid, art: RunArtifacts, s_values
) -> TraceProfile:
    """Restrict every snapshot to each wall-deformation depth."""
    layers = deformation_layers(grid, s_values)
    profiles = []
    for layer in layers:
        per_time = [
            np.stack([snap[layer.low, :], snap[layer.high, :]])
            for snap in art.snapshots
        ]
        profiles.append(np.stack(per_time))
    times = np.asarray(art.times, dtype=float)
    if len(times) > 1:
        weights = np.empty_like(times)
        weights[0] = 0.5 * (times[1] - times[0])
        weights[-1] = 0.5 * (times[-1] - times[-2])
        weights[1:-1] = 0.5 * (times[2:] - times[:-2])
    else:
        weights = np.ones(1)
    gaps = []
    for a, b in zip(profiles[:-1], profiles[1:]):
        diff = np.sum(np.abs(a - b), axis=(1, 2)) * grid.dx2
        gaps.append(float(np.sum(weights * diff)))
    return TraceProfile(
        s_values=tuple(float(s) for s in s_values),
        times=tuple(float(t) for t in art.times),
        profiles=tuple(profiles),
        l1_gaps=tuple(gaps),
    )


def time_zero_trace(art: RunArtifacts, k: float, tol_scale: float = 1.0) -> list:
    """Audit the t = 0 face of the space-time entropy fields.

    The time component of the level-k entropy field, band-averaged over
    the earliest snapshots, must not exceed |u0 - k| by more than the
    first-step motion allows; the conservation field's time component
    must match u0 itself to the same order.
    """
    by_step = {s: i for i, s in enumerate(art.snapshot_steps)}
    if 1 not in by_step or 2 not in by_step:
        raise ValueError("run lacks the first two step snapshots")
    idx = [by_step[0], by_step[1], by_step[2]]
    times = np.array([art.times[i] for i in idx])
    span = times[-1] - times[0]
    u0 = art.snapshots[0]

    def band_average(values):
        avg = np.zeros_like(values[0])
        for j in range(len(idx) - 1):
            avg += 0.5 * (values[j] + values[j + 1]) * (times[j + 1] - times[j])
        return avg / span

    rate0 = (art.snapshots[by_step[1]] - u0) / (times[1] - times[0])
    tol = span * float(np.mean(np.abs(rate0))) * tol_scale + 1e-12

    ent = band_average([np.abs(art.snapshots[i] - k) for i in idx])
    ineq = float(np.mean(np.maximum(ent - np.abs(u0 - k), 0.0)))
    status = "pass" if ineq <= tol else "fail"
    entries = [CheckEntry(f"tzero:ineq:k{k:g}", status, ineq, tol)]

    cons = band_average([art.snapshots[i] for i in idx])
    eq = float(np.mean(np.abs(cons - u0)))
    status = "pass" if eq <= tol else "fail"
    entries.append(CheckEntry("tzero:eq", status, eq, tol))
    return entries

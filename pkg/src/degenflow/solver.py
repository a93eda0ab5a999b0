"""Explicit finite-volume time stepping for the regularized problem.

One conservative update per step: local Lax-Friedrichs (Rusanov) faces
for the advective flux, centered differences of the diffusion primitive
b22 along the second axis, and an isotropic viscosity eps acting along
both axes.  No-flow faces carry exactly zero total flux; imposed-value
faces use ghost cells holding the boundary data at face-mirrored
positions, constant along the face normal.

Under the time-step bound of ``stable_dt`` with cfl <= 0.5 the update is
monotone in every stencil value, which is what the verification side
leans on: discrete maximum principle, comparison of ordered states, and
L1 contraction of pairs of runs with the same boundary data.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .domain import Grid
from .model import ProblemSpec

# How far outside [u_min, u_max] a step may land before it is rejected.
RANGE_SLACK = 1e-10

GAMMA1_MODES = ("zero_flux", "extrapolate")


class SolverError(RuntimeError):
    pass


class StaticProblemError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    t_end: float
    eps: float = 0.0
    cfl: float = 0.4
    snapshot_times: tuple = ()
    store_all: bool = False
    track_energy: bool = False
    # "extrapolate" deliberately breaks the no-flow walls (copies the wall
    # cell outward and lets f1 pass through); it exists for negative
    # controls in the verification suite.
    gamma1_mode: str = "zero_flux"

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if not (0.0 < self.cfl <= 0.5):
            raise ValueError("cfl must lie in (0, 0.5]")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if self.gamma1_mode not in GAMMA1_MODES:
            raise ValueError(f"unknown gamma1_mode {self.gamma1_mode!r}")


@dataclass
class RunArtifacts:
    """Everything a finished run exposes to verification and I/O."""

    times: list
    snapshots: list
    snapshot_steps: list  # step index each snapshot was taken at
    dt_history: list
    min_history: list
    max_history: list
    noflow_flux: list  # net outward flux through x1-boundary faces, per step
    dirichlet_flux: list  # net outward flux through x2-boundary faces, per step
    eps: float
    cfl: float
    gamma1_mode: str
    every_step: bool
    grad_sq: float = 0.0  # time integral of |grad u|^2 (if tracked)
    bgrad_sq: float = 0.0  # time integral of |d/dx2 b(u)|^2 (if tracked)

    def final(self) -> np.ndarray:
        return self.snapshots[-1]


def stable_dt(spec: ProblemSpec, grid: Grid, config: SolverConfig) -> float:
    """Explicit stability bound dt = cfl * min(advective, diffusive).

    Advective: 1 / max(|f1'|/dx1 + |f2'|/dx2); diffusive:
    1 / (2 max((b22' + eps)/dx2^2 + eps/dx1^2)).  On a square mesh these
    reduce to cfl*dx/max|f'| and cfl*dx^2/(2(max b22' + 2 eps)).  Raises
    when both degenerate (nothing ever moves).
    """
    u = spec.u_samples()
    adv_rate = float(np.max(np.abs(spec.df1(u)) / grid.dx1 + np.abs(spec.df2(u)) / grid.dx2))
    diff_rate = float(
        np.max((spec.db22(u) + config.eps) / grid.dx2**2 + config.eps / grid.dx1**2)
    )
    limits = []
    if adv_rate > 0:
        limits.append(1.0 / adv_rate)
    if diff_rate > 0:
        limits.append(0.5 / diff_rate)
    if not limits:
        raise StaticProblemError("static problem: flux and diffusion both vanish")
    return config.cfl * min(limits)


def numerical_fluxes(
    u: np.ndarray,
    spec: ProblemSpec,
    grid: Grid,
    eps: float,
    ghost_bottom: np.ndarray,
    ghost_top: np.ndarray,
    gamma1_mode: str = "zero_flux",
):
    """Face fluxes of the scheme for one state.

    Returns (fx1, fx2): fx1 has shape (n1+1, n2) (fluxes through the
    x1-normal faces), fx2 has shape (n1, n2+1).  Positive values point
    in the positive coordinate direction.
    """
    # x1-normal faces: Rusanov advective part plus linear viscosity
    L, R = u[:-1, :], u[1:, :]
    alpha = np.maximum(np.abs(spec.df1(L)), np.abs(spec.df1(R)))
    fx1 = np.zeros((grid.n1 + 1, grid.n2))
    fx1[1:-1] = 0.5 * (spec.f1(L) + spec.f1(R)) - 0.5 * alpha * (R - L) - eps * (R - L) / grid.dx1
    if gamma1_mode == "extrapolate":
        fx1[0] = spec.f1(u[0])
        fx1[-1] = spec.f1(u[-1])
    # x2-normal faces, ghost rows hold the imposed boundary values
    ub = np.concatenate([ghost_bottom[:, None], u, ghost_top[:, None]], axis=1)
    L2, R2 = ub[:, :-1], ub[:, 1:]
    alpha2 = np.maximum(np.abs(spec.df2(L2)), np.abs(spec.df2(R2)))
    fx2 = (
        0.5 * (spec.f2(L2) + spec.f2(R2))
        - 0.5 * alpha2 * (R2 - L2)
        - (spec.b22(R2) - spec.b22(L2)) / grid.dx2
        - eps * (R2 - L2) / grid.dx2
    )
    return fx1, fx2


def _advance(u, spec, grid, config, dt):
    gb = spec.a0_bottom_values(grid)
    gt = spec.a0_top_values(grid)
    fx1, fx2 = numerical_fluxes(
        u, spec, grid, config.eps, gb, gt, gamma1_mode=config.gamma1_mode
    )
    u_new = (
        u
        - (dt / grid.dx1) * (fx1[1:, :] - fx1[:-1, :])
        - (dt / grid.dx2) * (fx2[:, 1:] - fx2[:, :-1])
    )
    noflow_out = float((fx1[-1, :].sum() - fx1[0, :].sum()) * grid.dx2)
    dirichlet_out = float((fx2[:, -1].sum() - fx2[:, 0].sum()) * grid.dx1)
    return u_new, noflow_out, dirichlet_out


def step(u: np.ndarray, spec: ProblemSpec, grid: Grid, config: SolverConfig, dt: float | None = None):
    """One conservative update; returns the new state.

    The cell sum moves exactly by -dt * (net outward boundary flux), and
    the no-flow walls contribute exactly zero in the default mode.
    """
    if dt is None:
        dt = stable_dt(spec, grid, config)
    u_new, _, _ = _advance(np.asarray(u, dtype=float), spec, grid, config, dt)
    if not np.all(np.isfinite(u_new)):
        raise SolverError("non-finite state after step")
    return u_new


def _energy_rates(u, spec, grid):
    """(|grad u|^2, |d/dx2 b(u)|^2), both integrated over the domain."""
    from .entropy import d_dx1, d_dx2

    g1 = d_dx1(u, grid)
    g2 = d_dx2(u, grid)
    db = d_dx2(spec.b(u), grid)
    grad = float(np.sum(g1 * g1 + g2 * g2) * grid.area)
    bgrad = float(np.sum(db * db) * grid.area)
    return grad, bgrad


def run(spec: ProblemSpec, grid: Grid, config: SolverConfig) -> RunArtifacts:
    """Advance the initial state to t_end with a fixed stable step.

    Snapshots: always t = 0 and t_end; every step when ``store_all``;
    otherwise the dyadic early steps 1, 2, 4, 8, ... plus the first step
    at or past each requested snapshot time.  A step leaving
    [u_min, u_max] by more than RANGE_SLACK halves dt once for the rest
    of the run; a second violation aborts.
    """
    u = np.asarray(spec.u0.sample(grid), dtype=float)
    if np.min(u) < spec.u_min - RANGE_SLACK or np.max(u) > spec.u_max + RANGE_SLACK:
        raise SolverError("initial data leaves [u_min, u_max]")
    dt = stable_dt(spec, grid, config)
    halved = False

    times = [0.0]
    snapshots = [u.copy()]
    snapshot_steps = [0]
    dt_history: list[float] = []
    min_history: list[float] = []
    max_history: list[float] = []
    noflow: list[float] = []
    dirich: list[float] = []
    grad_sq = 0.0
    bgrad_sq = 0.0
    pending = sorted(set(float(s) for s in config.snapshot_times))

    t = 0.0
    n = 0
    tail = 1e-12 * max(1.0, config.t_end)
    while t < config.t_end - tail:
        dt_step = min(dt, config.t_end - t)
        u_new, g1f, g2f = _advance(u, spec, grid, config, dt_step)
        if not np.all(np.isfinite(u_new)):
            raise SolverError(f"non-finite state at step {n}")
        lo = float(np.min(u_new))
        hi = float(np.max(u_new))
        if lo < spec.u_min - RANGE_SLACK or hi > spec.u_max + RANGE_SLACK:
            if halved:
                raise SolverError(
                    f"state left [{spec.u_min}, {spec.u_max}] at step {n} "
                    f"(min {lo}, max {hi}) after halving dt; aborting"
                )
            halved = True
            dt = 0.5 * dt
            continue
        if config.track_energy:
            g, bg = _energy_rates(u_new, spec, grid)
            grad_sq += dt_step * g
            bgrad_sq += dt_step * bg
        u = u_new
        t += dt_step
        n += 1
        dt_history.append(dt_step)
        min_history.append(lo)
        max_history.append(hi)
        noflow.append(g1f)
        dirich.append(g2f)
        final_step = t >= config.t_end - tail
        want = config.store_all or final_step or _is_dyadic(n)
        if not want and pending and t >= pending[0] - tail:
            want = True
        if want:
            while pending and t >= pending[0] - tail:
                pending.pop(0)
            times.append(t)
            snapshots.append(u.copy())
            snapshot_steps.append(n)

    return RunArtifacts(
        times=times,
        snapshots=snapshots,
        snapshot_steps=snapshot_steps,
        dt_history=dt_history,
        min_history=min_history,
        max_history=max_history,
        noflow_flux=noflow,
        dirichlet_flux=dirich,
        eps=config.eps,
        cfl=config.cfl,
        gamma1_mode=config.gamma1_mode,
        every_step=bool(config.store_all),
        grad_sq=grad_sq,
        bgrad_sq=bgrad_sq,
    )


def _is_dyadic(n: int) -> bool:
    return n & (n - 1) == 0


def l1_distance(a: np.ndarray, b: np.ndarray, grid: Grid) -> float:
    return float(np.sum(np.abs(a - b)) * grid.area)


@dataclass(frozen=True)
class SweepRow:
    eps: float
    l1_gap_next: float | None  # L1 distance at t_end to the next-smaller eps
    eps_grad_sq: float  # eps * time integral of |grad u|^2
    bgrad_sq: float  # time integral of |d/dx2 b(u)|^2


def viscosity_continuation(
    spec: ProblemSpec,
    grid: Grid,
    config: SolverConfig,
    eps_values,
    threads: int = 1,
) -> tuple[list[SweepRow], list[RunArtifacts]]:
    """Run a decreasing viscosity ladder and compare final states.

    Rows report the pairwise L1 gaps between consecutive runs at t_end
    (a Cauchy diagnostic; no extrapolated limit is claimed) and the two
    energy functionals whose boundedness the regularization promises:
    eps * ||grad u||^2 and ||d/dx2 b(u)||^2, both integrated in time.
    """
    eps_values = [float(e) for e in eps_values]
    if len(eps_values) < 2:
        raise ValueError("need at least two viscosity values")
    if any(e <= 0 for e in eps_values):
        raise ValueError("viscosity values must be positive")
    if any(a <= b for a, b in zip(eps_values, eps_values[1:])):
        raise ValueError("viscosity values must be strictly decreasing")

    def one(eps):
        cfg = SolverConfig(
            t_end=config.t_end,
            eps=eps,
            cfl=config.cfl,
            snapshot_times=config.snapshot_times,
            store_all=False,
            track_energy=True,
            gamma1_mode=config.gamma1_mode,
        )
        return run(spec, grid, cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(one, eps_values))
    else:
        runs = [one(e) for e in eps_values]

    rows = []
    for i, (e, art) in enumerate(zip(eps_values, runs)):
        gap = None
        if i + 1 < len(runs):
            gap = l1_distance(art.final(), runs[i + 1].final(), grid)
        rows.append(
            SweepRow(
                eps=e,
                l1_gap_next=gap,
                eps_grad_sq=e * art.grad_sq,
                bgrad_sq=art.bgrad_sq,
            )
        )
    return rows, runs

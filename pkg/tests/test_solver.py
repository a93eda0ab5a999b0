import numpy as np
import pytest

from degenflow.domain import GridSpec, build_grid
from degenflow.model import BumpField, ConstantField, pinned
from degenflow.solver import (
    SolverConfig,
    SolverError,
    StaticProblemError,
    l1_distance,
    run,
    stable_dt,
    step,
    viscosity_continuation,
)


def unit_grid(n):
    return build_grid(GridSpec(n, n, (0.0, 1.0), (0.0, 1.0)))


def bump_problem(**model_kw):
    u0 = BumpField(0.5, 0.4, center1=0.5, width1=0.3, center2=0.5, width2=0.3)
    return pinned(1, 1, u0=u0, **model_kw)


# ---------------------------------------------------------------------
# step size
# ---------------------------------------------------------------------


def test_stable_dt_advective_oracle():
    # max |f1'| = 1 on a dx = 0.01 mesh at cfl 0.4 gives dt = 0.004
    spec = pinned(1, 1, flux_scale=1.0, diff_scale=0.0)
    grid = unit_grid(100)
    dt = stable_dt(spec, grid, SolverConfig(t_end=1.0, eps=0.0, cfl=0.4))
    assert dt == pytest.approx(0.004, rel=1e-12)


def test_stable_dt_diffusive_oracle():
    # b22' = 1 on a dx = 0.1 mesh at cfl 0.4 gives dt = 0.4 * dx^2 / 2 = 0.002
    spec = pinned(1, 1, flux_scale=0.0, diff_scale=1.0, diff_exponent=0)
    grid = unit_grid(10)
    dt = stable_dt(spec, grid, SolverConfig(t_end=1.0, eps=0.0, cfl=0.4))
    assert dt == pytest.approx(0.002, rel=1e-12)


def test_stable_dt_viscosity_enters_both_axes():
    spec = pinned(1, 1, flux_scale=0.0, diff_scale=0.0)
    grid = build_grid(GridSpec(8, 4, (0.0, 1.0), (0.0, 2.0)))
    eps = 0.02
    dt = stable_dt(spec, grid, SolverConfig(t_end=1.0, eps=eps, cfl=0.4))
    expected = 0.4 * 0.5 / (eps / grid.dx2**2 + eps / grid.dx1**2)
    assert dt == pytest.approx(expected, rel=1e-12)


def test_stable_dt_static_problem_raises():
    spec = pinned(1, 1, flux_scale=0.0, diff_scale=0.0)
    with pytest.raises(StaticProblemError):
        stable_dt(spec, unit_grid(8), SolverConfig(t_end=1.0, eps=0.0))


@pytest.mark.parametrize(
    "kw",
    [
        dict(t_end=0.0),
        dict(t_end=-1.0),
        dict(t_end=1.0, cfl=0.0),
        dict(t_end=1.0, cfl=0.6),
        dict(t_end=1.0, eps=-1e-3),
        dict(t_end=1.0, gamma1_mode="reflect"),
    ],
)
def test_config_rejects_bad_values(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


# ---------------------------------------------------------------------
# conservation and walls
# ---------------------------------------------------------------------


def test_mass_moves_by_recorded_boundary_flux():
    spec = bump_problem(diff_scale=0.1, f2_slope=1.0)
    grid = unit_grid(24)
    config = SolverConfig(t_end=0.02, eps=1e-3, store_all=True)
    art = run(spec, grid, config)
    mass = [float(s.sum()) * grid.area for s in art.snapshots]
    for k in range(len(art.dt_history)):
        flux = art.noflow_flux[k] + art.dirichlet_flux[k]
        assert mass[k + 1] - mass[k] == pytest.approx(
            -art.dt_history[k] * flux, abs=1e-13
        )


def test_zero_flux_walls_are_exact():
    spec = bump_problem(diff_scale=0.1, f2_slope=1.0)
    art = run(spec, unit_grid(16), SolverConfig(t_end=0.02, eps=1e-3))
    assert all(v == 0.0 for v in art.noflow_flux)


def test_extrapolate_walls_leak():
    # off-center data so the two x1 walls see different states
    u0 = BumpField(0.5, 0.4, center1=0.3, width1=0.25, center2=0.5, width2=0.3)
    spec = pinned(1, 1, u0=u0, diff_scale=0.1)
    config = SolverConfig(t_end=0.02, eps=1e-3, gamma1_mode="extrapolate")
    art = run(spec, unit_grid(16), config)
    assert max(abs(v) for v in art.noflow_flux) > 0.0


def test_run_stays_in_range():
    spec = bump_problem(diff_scale=0.1, f2_slope=1.0)
    art = run(spec, unit_grid(32), SolverConfig(t_end=0.05, eps=1e-3))
    assert min(art.min_history) >= -1e-12
    assert max(art.max_history) <= 1.0 + 1e-12


# ---------------------------------------------------------------------
# failure paths
# ---------------------------------------------------------------------


def test_run_rejects_out_of_range_initial_data():
    spec = pinned(1, 1, u0=ConstantField(2.0))
    with pytest.raises(SolverError):
        run(spec, unit_grid(8), SolverConfig(t_end=0.01, eps=1e-3))


def test_step_rejects_non_finite_state():
    spec = bump_problem()
    grid = unit_grid(8)
    u = spec.u0.sample(grid).astype(float)
    u[3, 3] = np.nan
    with pytest.raises(SolverError):
        step(u, spec, grid, SolverConfig(t_end=0.01, eps=1e-3))


# ---------------------------------------------------------------------
# snapshot schedule
# ---------------------------------------------------------------------


def test_snapshot_schedule():
    spec = bump_problem(diff_scale=0.1, f2_slope=1.0)
    grid = unit_grid(16)
    dt = stable_dt(spec, grid, SolverConfig(t_end=1.0, eps=1e-3))
    t_req = 12.5 * dt
    config = SolverConfig(t_end=26.3 * dt, eps=1e-3, snapshot_times=(t_req,))
    art = run(spec, grid, config)

    steps = art.snapshot_steps
    n_final = len(art.dt_history)
    assert steps[0] == 0
    assert steps == sorted(set(steps))
    assert steps[-1] == n_final
    # every dyadic step up to the end is kept
    dyadic = {1, 2, 4, 8, 16}
    assert dyadic <= set(steps)
    # the first step at or past the requested time is kept
    hits = [t for t in art.times if t >= t_req - 1e-12]
    assert hits and hits[0] - t_req < dt + 1e-12
    # uniform dt, so times line up with step counts
    np.testing.assert_allclose(art.times[:-1], [s * dt for s in steps[:-1]], rtol=1e-9)
    assert art.times[-1] == pytest.approx(config.t_end, rel=1e-9)
    assert not art.every_step


def test_store_all_keeps_every_step():
    spec = bump_problem(diff_scale=0.1)
    art = run(spec, unit_grid(8), SolverConfig(t_end=0.01, eps=1e-3, store_all=True))
    assert art.every_step
    assert art.snapshot_steps == list(range(len(art.dt_history) + 1))


# ---------------------------------------------------------------------
# distances and the viscosity ladder
# ---------------------------------------------------------------------


def test_l1_distance_closed_form():
    grid = build_grid(GridSpec(4, 5, (0.0, 2.0), (0.0, 1.0)))
    a = np.full(grid.shape, 0.75)
    b = np.full(grid.shape, 0.5)
    assert l1_distance(a, b, grid) == pytest.approx(0.25 * 2.0)


@pytest.mark.parametrize(
    "eps_values",
    [
        [0.1],
        [0.1, -0.05],
        [0.1, 0.1],
        [0.05, 0.1],
    ],
)
def test_viscosity_ladder_rejects_bad_values(eps_values):
    spec = bump_problem(diff_scale=0.1)
    grid = unit_grid(8)
    with pytest.raises(ValueError):
        viscosity_continuation(spec, grid, SolverConfig(t_end=0.01), eps_values)


def test_viscosity_ladder_rows():
    spec = bump_problem(diff_scale=0.1, f2_slope=1.0)
    grid = unit_grid(12)
    config = SolverConfig(t_end=0.02)
    eps_values = [0.1, 0.05, 0.025]
    rows, runs = viscosity_continuation(spec, grid, config, eps_values)
    assert [r.eps for r in rows] == eps_values
    assert rows[-1].l1_gap_next is None
    for row, art, nxt in zip(rows[:-1], runs[:-1], runs[1:]):
        assert row.l1_gap_next == pytest.approx(
            l1_distance(art.final(), nxt.final(), grid)
        )
    for row, art in zip(rows, runs):
        assert row.eps_grad_sq == pytest.approx(row.eps * art.grad_sq)
        assert row.eps_grad_sq > 0.0
        assert row.bgrad_sq >= 0.0


def test_viscosity_ladder_threaded_matches_serial():
    spec = bump_problem(diff_scale=0.1)
    grid = unit_grid(10)
    config = SolverConfig(t_end=0.01)
    serial, _ = viscosity_continuation(spec, grid, config, [0.1, 0.05])
    threaded, _ = viscosity_continuation(spec, grid, config, [0.1, 0.05], threads=2)
    assert serial == threaded


def test_energy_tracking_off_by_default():
    spec = bump_problem(diff_scale=0.1)
    art = run(spec, unit_grid(8), SolverConfig(t_end=0.01, eps=1e-3))
    assert art.grad_sq == 0.0 and art.bgrad_sq == 0.0

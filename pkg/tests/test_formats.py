import numpy as np
import pytest

from degenflow.domain import GridSpec, build_grid
from degenflow.formats import (
    MANIFEST_NAME,
    FormatError,
    read_report,
    read_run,
    read_snapshot,
    read_sweep,
    write_report,
    write_run,
    write_snapshot,
    write_sweep,
)
from degenflow.model import BumpField, pinned
from degenflow.scenario import parse_scenario, serialize_scenario
from degenflow.solver import SolverConfig, SweepRow, run
from degenflow.verify import CheckEntry

SCENARIO = """\
[grid]
n1 = 8
n2 = 8

[model]
family = pinned
diff_scale = 0.1
f2_slope = 1.0

[data]
u0_kind = bump
u0_base = 0.5
u0_amp = 0.4
u0_center1 = 0.5
u0_width1 = 0.3
u0_center2 = 0.5
u0_width2 = 0.3
a0_kind = constant
a0_value = 0.5

[solver]
t_end = 0.01
eps = 0.001
store_all = true
"""


def small_run():
    sc = parse_scenario(SCENARIO)
    u0 = BumpField(0.5, 0.4, center1=0.5, width1=0.3, center2=0.5, width2=0.3)
    spec = pinned(1, 1, u0=u0, diff_scale=0.1, f2_slope=1.0)
    grid = build_grid(GridSpec(8, 8, (0.0, 1.0), (0.0, 1.0)))
    art = run(spec, grid, SolverConfig(t_end=0.01, eps=1e-3, store_all=True))
    return sc, art


# ---------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------


def test_snapshot_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(7)
    field = rng.uniform(-1, 1, size=(5, 3))
    field[0, 0] = 1.0 / 3.0  # not representable in decimal
    path = tmp_path / "snap.txt"
    write_snapshot(path, 0.1 + 0.2, field)
    t, back = read_snapshot(path)
    assert t == 0.1 + 0.2
    assert back.shape == (5, 3)
    assert np.array_equal(back, field)


def test_snapshot_rejects_non_2d(tmp_path):
    with pytest.raises(FormatError):
        write_snapshot(tmp_path / "x.txt", 0.0, np.zeros(4))


def test_snapshot_rejects_bad_header(tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("time 0.0 rows 2 cols 2\n0 0\n0 0\n")
    with pytest.raises(FormatError, match="header"):
        read_snapshot(path)


def test_snapshot_rejects_wrong_row_count(tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("t 0.0 n1 3 n2 2\n0.0 0.0\n0.0 0.0\n")
    with pytest.raises(FormatError, match="rows"):
        read_snapshot(path)


def test_snapshot_rejects_ragged_row(tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("t 0.0 n1 2 n2 2\n0.0 0.0\n0.0\n")
    with pytest.raises(FormatError, match="values"):
        read_snapshot(path)


# ---------------------------------------------------------------------
# run manifests
# ---------------------------------------------------------------------


def test_run_round_trip(tmp_path):
    sc, art = small_run()
    text = serialize_scenario(sc)
    manifest = write_run(tmp_path, text, art)
    assert manifest.name == MANIFEST_NAME
    stored = read_run(manifest)
    assert stored.intact
    assert stored.scenario_text == text
    assert parse_scenario(stored.scenario_text) == sc

    back = stored.artifacts
    assert back.times == art.times
    assert back.snapshot_steps == art.snapshot_steps
    assert back.dt_history == art.dt_history
    assert back.min_history == art.min_history
    assert back.max_history == art.max_history
    assert back.noflow_flux == art.noflow_flux
    assert back.dirichlet_flux == art.dirichlet_flux
    assert back.eps == art.eps
    assert back.cfl == art.cfl
    assert back.gamma1_mode == art.gamma1_mode
    assert back.every_step == art.every_step
    for a, b in zip(back.snapshots, art.snapshots):
        assert np.array_equal(a, b)


def test_tampered_snapshot_breaks_hash(tmp_path):
    sc, art = small_run()
    manifest = write_run(tmp_path, serialize_scenario(sc), art)
    victim = sorted(tmp_path.glob("snap_*.txt"))[-1]
    lines = victim.read_text().splitlines()
    row = lines[1].split()
    row[0] = repr(7.5)
    lines[1] = " ".join(row)
    victim.write_text("\n".join(lines) + "\n")
    stored = read_run(manifest)
    assert not stored.intact
    assert float(np.max(stored.artifacts.snapshots[-1])) == 7.5


def test_tampered_scenario_breaks_hash(tmp_path):
    sc, art = small_run()
    manifest = write_run(tmp_path, serialize_scenario(sc), art)
    text = manifest.read_text().replace("eps = 0.001", "eps = 0.002")
    manifest.write_text(text)
    assert not read_run(manifest).intact


def test_scenario_delimiter_collision_rejected(tmp_path):
    _, art = small_run()
    with pytest.raises(FormatError, match="delimiter"):
        write_run(tmp_path, "[grid]\nscenario-end\n", art)


def test_read_run_rejects_non_manifest(tmp_path):
    path = tmp_path / "x"
    path.write_text("hello\n")
    with pytest.raises(FormatError, match="not a manifest"):
        read_run(path)


def test_read_run_rejects_time_mismatch(tmp_path):
    sc, art = small_run()
    manifest = write_run(tmp_path, serialize_scenario(sc), art)
    first = sorted(tmp_path.glob("snap_*.txt"))[0]
    lines = first.read_text().splitlines()
    lines[0] = lines[0].replace("t 0.0", "t 0.125")
    first.write_text("\n".join(lines) + "\n")
    with pytest.raises(FormatError, match="time mismatch"):
        read_run(manifest)


def test_read_run_rejects_unknown_line(tmp_path):
    sc, art = small_run()
    manifest = write_run(tmp_path, serialize_scenario(sc), art)
    manifest.write_text(manifest.read_text() + "comment hello\n")
    with pytest.raises(FormatError, match="unknown manifest line"):
        read_run(manifest)


# ---------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------


def test_report_round_trip(tmp_path):
    entries = [
        CheckEntry("max_principle", "pass", 0.0, 1e-12),
        CheckEntry("entropy:k0:phi0", "fail", -0.25, 1e-10),
        CheckEntry("boundary:cstar", "info", 1.0 / 3.0, 0.0),
    ]
    path = tmp_path / "report.txt"
    write_report(path, entries)
    back, digest = read_report(path)
    assert back == entries
    assert digest is None


def test_report_round_trip_with_hash(tmp_path):
    path = tmp_path / "report.txt"
    write_report(path, [CheckEntry("max_principle", "pass", 0.0, 1e-12)], "ab12")
    back, digest = read_report(path)
    assert len(back) == 1
    assert digest == "ab12"


def test_report_rejects_bad_line(tmp_path):
    path = tmp_path / "report.txt"
    path.write_text("max_principle pass 0.0\n")
    with pytest.raises(FormatError, match="bad report line"):
        read_report(path)


# ---------------------------------------------------------------------
# sweep tables
# ---------------------------------------------------------------------


def test_sweep_round_trip(tmp_path):
    rows = [
        SweepRow(eps=0.1, l1_gap_next=1.0 / 7.0, eps_grad_sq=0.25, bgrad_sq=0.5),
        SweepRow(eps=0.05, l1_gap_next=None, eps_grad_sq=0.125, bgrad_sq=0.25),
    ]
    path = tmp_path / "sweep.tsv"
    write_sweep(path, rows)
    assert read_sweep(path) == rows


def test_sweep_rejects_bad_header(tmp_path):
    path = tmp_path / "sweep.tsv"
    path.write_text("eps\tgap\n")
    with pytest.raises(FormatError, match="header"):
        read_sweep(path)


def test_sweep_rejects_short_row(tmp_path):
    path = tmp_path / "sweep.tsv"
    path.write_text("eps\tl1_gap_next\teps_grad_sq\tbgrad_sq\n0.1\t-\n")
    with pytest.raises(FormatError, match="row"):
        read_sweep(path)

from pathlib import Path

import pytest

from degenflow.model import ConstantEdge
from degenflow.scenario import (
    Scenario,
    ScenarioError,
    build_problem,
    build_problem_b,
    parse_scenario,
    serialize_scenario,
)
from degenflow.verify import ALL_CHECKS

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
SCENARIO_FILES = sorted(SCENARIO_DIR.glob("*.ini"))

MINIMAL = """\
[grid]
n1 = 8
n2 = 8

[model]
family = pinned

[data]
u0_kind = constant
u0_value = 0.5
a0_kind = constant
a0_value = 0.5

[solver]
t_end = 0.1
eps = 0.01
"""


def test_scenario_corpus_present():
    assert len(SCENARIO_FILES) >= 5


@pytest.mark.parametrize("path", SCENARIO_FILES, ids=lambda p: p.stem)
def test_round_trip_is_identity(path):
    sc = parse_scenario(path.read_text())
    again = parse_scenario(serialize_scenario(sc))
    assert again == sc
    # a second round trip is textually stable
    assert serialize_scenario(again) == serialize_scenario(sc)


def test_defaults_materialized():
    sc = parse_scenario(MINIMAL)
    assert sc.extent1 == (0.0, 1.0)
    assert sc.extent2 == (0.0, 1.0)
    assert sc.condition == "C"
    assert sc.model_params == dict(
        p=1,
        q=1,
        flux_scale=1.0,
        diff_scale=0.1,
        diff_exponent=1,
        f2_slope=0.0,
        u_min=0.0,
        u_max=1.0,
    )
    assert sc.cfl == 0.4
    assert sc.snapshots == ()
    assert not sc.store_all
    assert sc.gamma1_mode == "zero_flux"
    assert sc.checks == tuple(ALL_CHECKS)
    assert sc.eps == 0.01 and sc.eps_list is None
    assert sc.u0b_kind is None and sc.a0_top_value is None


def test_build_problem_shapes():
    spec, grid, config = build_problem(parse_scenario(MINIMAL))
    assert grid.shape == (8, 8)
    assert config.t_end == 0.1
    assert config.eps == 0.01
    assert spec.u_min == 0.0 and spec.u_max == 1.0


# ---------------------------------------------------------------------
# parse errors carry line numbers
# ---------------------------------------------------------------------


def _line_of(err: ScenarioError) -> int | None:
    return err.line


def test_duplicate_key_line_number():
    text = "[grid]\nn1 = 8\nn1 = 9\n"
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert exc.value.line == 3
    assert "duplicate key" in str(exc.value)


def test_duplicate_section_line_number():
    text = "[grid]\nn1 = 8\n[grid]\n"
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert exc.value.line == 3


def test_unknown_section_line_number():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario("[grid]\nn1 = 8\n[output]\n")
    assert exc.value.line == 3
    assert "unknown section" in str(exc.value)


def test_malformed_line():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario("[grid]\nn1\n")
    assert exc.value.line == 2


def test_key_outside_section():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario("n1 = 8\n[grid]\n")
    assert exc.value.line == 1


def test_unknown_key_reports_first_offender():
    text = MINIMAL.replace("[solver]", "[solver]\nwarp = 9")
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert "unknown key 'warp'" in str(exc.value)
    assert exc.value.line is not None


def test_bad_integer_value():
    text = MINIMAL.replace("n1 = 8", "n1 = 8.5")
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert exc.value.line == 2


def test_comments_and_blanks_ignored():
    text = "# header\n\n" + MINIMAL.replace(
        "n1 = 8", "n1 = 8  # cells"
    )
    assert parse_scenario(text).n1 == 8


# ---------------------------------------------------------------------
# structural validation
# ---------------------------------------------------------------------


@pytest.mark.parametrize("section", ["[grid]", "[model]", "[data]", "[solver]"])
def test_missing_required_section(section):
    text = "\n".join(
        block
        for block in MINIMAL.split("\n\n")
        if not block.startswith(section)
    )
    with pytest.raises(ScenarioError, match="missing section"):
        parse_scenario(text)


def test_missing_required_key():
    text = MINIMAL.replace("family = pinned", "family = tadmor_tao")
    with pytest.raises(ScenarioError, match="missing key 'ell'"):
        parse_scenario(text)


def test_eps_and_eps_list_are_exclusive():
    both = MINIMAL.replace("eps = 0.01", "eps = 0.01\neps_list = 0.1 0.05")
    with pytest.raises(ScenarioError, match="exactly one"):
        parse_scenario(both)
    neither = MINIMAL.replace("eps = 0.01\n", "")
    with pytest.raises(ScenarioError, match="exactly one"):
        parse_scenario(neither)


@pytest.mark.parametrize(
    "value,msg",
    [
        ("0.1", "at least two"),
        ("0.05 0.1", "strictly decreasing"),
        ("0.1 0.1", "strictly decreasing"),
        ("0.1 -0.05", "strictly decreasing|positive"),
        ("0.1 0.0", "positive"),
    ],
)
def test_eps_list_validation(value, msg):
    text = MINIMAL.replace("eps = 0.01", f"eps_list = {value}")
    with pytest.raises(ScenarioError, match=msg):
        parse_scenario(text)


def test_sweep_scenario_runs_at_largest_viscosity():
    text = MINIMAL.replace("eps = 0.01", "eps_list = 0.1 0.05 0.025")
    sc = parse_scenario(text)
    assert sc.eps_list == (0.1, 0.05, 0.025)
    _, _, config = build_problem(sc)
    assert config.eps == 0.1


def test_checks_subset():
    text = MINIMAL + "\n[verify]\nchecks = max_principle, noflow\n"
    sc = parse_scenario(text)
    assert sc.checks == ("max_principle", "noflow")


def test_unknown_check_token():
    text = MINIMAL + "\n[verify]\nchecks = max_principle warp\n"
    with pytest.raises(ScenarioError, match="warp"):
        parse_scenario(text)


# ---------------------------------------------------------------------
# semantic fail-fast through the builders
# ---------------------------------------------------------------------


def test_model_violation_is_flagged_at_parse_time():
    text = MINIMAL.replace(
        "family = pinned", "family = tadmor_tao\nell = 2\nn = 3"
    )
    with pytest.raises(ScenarioError, match=r"\[model\]"):
        parse_scenario(text)


def test_grid_violation():
    text = MINIMAL.replace("n1 = 8", "n1 = 1")
    with pytest.raises(ScenarioError, match=r"\[grid\]"):
        parse_scenario(text)


def test_solver_violation():
    text = MINIMAL.replace("t_end = 0.1", "t_end = 0.0")
    with pytest.raises(ScenarioError, match=r"\[solver\]"):
        parse_scenario(text)


# ---------------------------------------------------------------------
# optional blocks
# ---------------------------------------------------------------------


def test_second_initial_block():
    text = MINIMAL.replace(
        "a0_kind = constant",
        "u0b_kind = constant\nu0b_value = 0.25\na0_kind = constant",
    )
    sc = parse_scenario(text)
    assert sc.u0b_kind == "constant"
    spec_b = build_problem_b(sc)
    spec_a, grid, _ = build_problem(sc)
    assert float(spec_b.u0.sample(grid)[0, 0]) == 0.25
    assert float(spec_a.u0.sample(grid)[0, 0]) == 0.5


def test_build_problem_b_requires_block():
    with pytest.raises(ScenarioError, match="second initial-data"):
        build_problem_b(parse_scenario(MINIMAL))


def test_a0_top_value_builds_distinct_edge():
    text = MINIMAL.replace(
        "a0_value = 0.5", "a0_value = 0.5\na0_top_value = 0.75"
    )
    sc = parse_scenario(text)
    spec, grid, _ = build_problem(sc)
    assert isinstance(spec.a0_top, ConstantEdge)
    assert float(spec.a0_top_values(grid)[0]) == 0.75
    assert float(spec.a0_bottom_values(grid)[0]) == 0.5

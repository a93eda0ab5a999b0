"""Sectioned key = value configuration for complete problem setups.

The format is deliberately tiny: `[section]` headers, one `key = value`
per line, `#` comments, no nesting, no quoting.  Parsing materializes
every default, rejects unknown or duplicate keys with the offending
line number, and the canonical serializer round-trips: parsing its
output reproduces the scenario exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .domain import GridSpec, build_grid
from .model import (
    BumpEdge,
    BumpField,
    ConstantEdge,
    ConstantField,
    ModelError,
    StepField,
    pinned,
    tadmor_tao,
)
from .solver import SolverConfig
from .verify import ALL_CHECKS


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


_SECTION_RE = re.compile(r"^\[([a-z0-9_]+)\]$")
_KEY_RE = re.compile(r"^[a-z0-9_]+$")

SECTIONS = ("grid", "model", "data", "solver", "verify")

U0_KINDS = ("constant", "bump", "step")
A0_KINDS = ("constant", "bump")
FAMILIES = ("tadmor_tao", "pinned")

# model parameter keys per family, with defaults (None means required)
FAMILY_PARAMS = {
    "tadmor_tao": (
        ("ell", int, None),
        ("n", int, None),
        ("diff_scale", float, 1.0),
        ("f2_slope", float, 0.0),
        ("u_min", float, -1.0),
        ("u_max", float, 1.0),
    ),
    "pinned": (
        ("p", int, 1),
        ("q", int, 1),
        ("flux_scale", float, 1.0),
        ("diff_scale", float, 0.1),
        ("diff_exponent", int, 1),
        ("f2_slope", float, 0.0),
        ("u_min", float, 0.0),
        ("u_max", float, 1.0),
    ),
}

# initial-data parameter keys per kind (suffixes after the prefix)
U0_PARAMS = {
    "constant": ("value",),
    "bump": ("base", "amp", "center1", "width1", "center2", "width2"),
    "step": ("left", "right", "position"),
}
A0_PARAMS = {
    "constant": ("value",),
    "bump": ("base", "amp", "center", "width"),
}


@dataclass(frozen=True)
class Scenario:
    """Fully validated, default-materialized problem description."""

    n1: int
    n2: int
    extent1: tuple
    extent2: tuple
    family: str
    condition: str
    model_params: dict
    u0_kind: str
    u0_params: dict
    a0_kind: str
    a0_params: dict
    a0_top_value: float | None
    u0b_kind: str | None
    u0b_params: dict
    t_end: float
    eps: float | None
    eps_list: tuple | None
    cfl: float
    snapshots: tuple
    store_all: bool
    gamma1_mode: str
    checks: tuple


def _parse_lines(text: str):
    """text -> {section: {key: (raw value, line number)}}"""
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION_RE.match(line)
        if m:
            name = m.group(1)
            if name not in SECTIONS:
                raise ScenarioError(f"unknown section [{name}]", lineno)
            if name in sections:
                raise ScenarioError(f"duplicate section [{name}]", lineno)
            sections[name] = {}
            current = name
            continue
        if "=" not in line:
            raise ScenarioError("expected 'key = value' or '[section]'", lineno)
        if current is None:
            raise ScenarioError("key outside any section", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not _KEY_RE.match(key):
            raise ScenarioError(f"malformed key {key!r}", lineno)
        if key in sections[current]:
            raise ScenarioError(f"duplicate key {key!r} in [{current}]", lineno)
        sections[current][key] = (value, lineno)
    return sections


class _Section:
    """One parsed section with typed, tracked key consumption."""

    def __init__(self, name: str, entries: dict):
        self.name = name
        self.entries = dict(entries)

    def take(self, key: str, convert, default="__required__"):
        if key not in self.entries:
            if default == "__required__":
                raise ScenarioError(f"[{self.name}] is missing key {key!r}")
            return default
        raw, lineno = self.entries.pop(key)
        try:
            return convert(raw)
        except (ValueError, TypeError) as exc:
            raise ScenarioError(
                f"bad value for {key!r}: {exc}", lineno
            ) from None

    def finish(self):
        if self.entries:
            key = min(self.entries, key=lambda k: self.entries[k][1])
            raise ScenarioError(
                f"unknown key {key!r} in [{self.name}]", self.entries[key][1]
            )


def _float(raw: str) -> float:
    return float(raw)


def _int(raw: str) -> int:
    if not re.match(r"^[+-]?\d+$", raw):
        raise ValueError(f"not an integer: {raw!r}")
    return int(raw)


def _bool(raw: str) -> bool:
    if raw == "true":
        return True
    if raw == "false":
        return False
    raise ValueError(f"expected true or false, got {raw!r}")


def _pair(raw: str) -> tuple:
    parts = raw.split()
    if len(parts) != 2:
        raise ValueError(f"expected two numbers, got {raw!r}")
    lo, hi = float(parts[0]), float(parts[1])
    return (lo, hi)


def _floats(raw: str) -> tuple:
    return tuple(float(p) for p in raw.split())


def _choice(options):
    def convert(raw: str):
        if raw not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {raw!r}")
        return raw

    return convert


def _tokens(options):
    def convert(raw: str):
        toks = tuple(raw.replace(",", " ").split())
        for t in toks:
            if t not in options:
                raise ValueError(
                    f"expected tokens from {', '.join(options)}, got {t!r}"
                )
        return toks

    return convert


def _data_params(sec: _Section, prefix: str, kind: str, table: dict) -> dict:
    return {
        name: sec.take(f"{prefix}_{name}", _float)
        for name in table[kind]
    }


def parse_scenario(text: str) -> Scenario:
    raw = _parse_lines(text)
    for required in ("grid", "model", "data", "solver"):
        if required not in raw:
            raise ScenarioError(f"missing section [{required}]")

    grid = _Section("grid", raw["grid"])
    n1 = grid.take("n1", _int)
    n2 = grid.take("n2", _int)
    extent1 = grid.take("extent1", _pair, (0.0, 1.0))
    extent2 = grid.take("extent2", _pair, (0.0, 1.0))
    grid.finish()

    model = _Section("model", raw["model"])
    family = model.take("family", _choice(FAMILIES))
    condition = model.take("condition", _choice(("C", "C'")), "C")
    params = {}
    for name, conv, default in FAMILY_PARAMS[family]:
        value = model.take(name, conv) if default is None else model.take(
            name, conv, default
        )
        params[name] = value
    model.finish()

    data = _Section("data", raw["data"])
    u0_kind = data.take("u0_kind", _choice(U0_KINDS))
    u0_params = _data_params(data, "u0", u0_kind, U0_PARAMS)
    a0_kind = data.take("a0_kind", _choice(A0_KINDS))
    a0_params = _data_params(data, "a0", a0_kind, A0_PARAMS)
    a0_top_value = data.take("a0_top_value", _float, None)
    u0b_kind = data.take("u0b_kind", _choice(U0_KINDS), None)
    u0b_params = (
        _data_params(data, "u0b", u0b_kind, U0_PARAMS) if u0b_kind else {}
    )
    data.finish()

    solver = _Section("solver", raw["solver"])
    t_end = solver.take("t_end", _float)
    eps = solver.take("eps", _float, None)
    eps_list = solver.take("eps_list", _floats, None)
    if (eps is None) == (eps_list is None):
        raise ScenarioError("[solver] needs exactly one of eps, eps_list")
    if eps_list is not None:
        if len(eps_list) < 2:
            raise ScenarioError("eps_list needs at least two values")
        if any(a <= b for a, b in zip(eps_list, eps_list[1:])):
            raise ScenarioError("eps_list must be strictly decreasing")
        if eps_list[-1] <= 0:
            raise ScenarioError("eps_list values must be positive")
    cfl = solver.take("cfl", _float, 0.4)
    snapshots = solver.take("snapshots", _floats, ())
    store_all = solver.take("store_all", _bool, False)
    gamma1_mode = solver.take(
        "gamma1_mode", _choice(("zero_flux", "extrapolate")), "zero_flux"
    )
    solver.finish()

    checks = tuple(ALL_CHECKS)
    if "verify" in raw:
        verify = _Section("verify", raw["verify"])
        checks = verify.take("checks", _tokens(ALL_CHECKS), tuple(ALL_CHECKS))
        verify.finish()

    scenario = Scenario(
        n1=n1,
        n2=n2,
        extent1=extent1,
        extent2=extent2,
        family=family,
        condition=condition,
        model_params=params,
        u0_kind=u0_kind,
        u0_params=u0_params,
        a0_kind=a0_kind,
        a0_params=a0_params,
        a0_top_value=a0_top_value,
        u0b_kind=u0b_kind,
        u0b_params=u0b_params,
        t_end=t_end,
        eps=eps,
        eps_list=eps_list,
        cfl=cfl,
        snapshots=snapshots,
        store_all=store_all,
        gamma1_mode=gamma1_mode,
        checks=checks,
    )
    # fail fast on semantic violations (family constraints, ranges)
    build_problem(scenario)
    return scenario


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return " ".join(_fmt(v) for v in value)
    return str(value)


def serialize_scenario(sc: Scenario) -> str:
    lines = ["[grid]"]
    lines.append(f"n1 = {sc.n1}")
    lines.append(f"n2 = {sc.n2}")
    lines.append(f"extent1 = {_fmt(sc.extent1)}")
    lines.append(f"extent2 = {_fmt(sc.extent2)}")
    lines.append("")
    lines.append("[model]")
    lines.append(f"family = {sc.family}")
    lines.append(f"condition = {sc.condition}")
    for name, _, _ in FAMILY_PARAMS[sc.family]:
        lines.append(f"{name} = {_fmt(sc.model_params[name])}")
    lines.append("")
    lines.append("[data]")
    lines.append(f"u0_kind = {sc.u0_kind}")
    for name in U0_PARAMS[sc.u0_kind]:
        lines.append(f"u0_{name} = {_fmt(sc.u0_params[name])}")
    lines.append(f"a0_kind = {sc.a0_kind}")
    for name in A0_PARAMS[sc.a0_kind]:
        lines.append(f"a0_{name} = {_fmt(sc.a0_params[name])}")
    if sc.a0_top_value is not None:
        lines.append(f"a0_top_value = {_fmt(sc.a0_top_value)}")
    if sc.u0b_kind is not None:
        lines.append(f"u0b_kind = {sc.u0b_kind}")
        for name in U0_PARAMS[sc.u0b_kind]:
            lines.append(f"u0b_{name} = {_fmt(sc.u0b_params[name])}")
    lines.append("")
    lines.append("[solver]")
    lines.append(f"t_end = {_fmt(sc.t_end)}")
    if sc.eps is not None:
        lines.append(f"eps = {_fmt(sc.eps)}")
    else:
        lines.append(f"eps_list = {_fmt(sc.eps_list)}")
    lines.append(f"cfl = {_fmt(sc.cfl)}")
    if sc.snapshots:
        lines.append(f"snapshots = {_fmt(sc.snapshots)}")
    lines.append(f"store_all = {_fmt(sc.store_all)}")
    lines.append(f"gamma1_mode = {sc.gamma1_mode}")
    lines.append("")
    lines.append("[verify]")
    lines.append(f"checks = {' '.join(sc.checks)}")
    return "\n".join(lines) + "\n"


def _build_u0(kind: str, p: dict):
    if kind == "constant":
        return ConstantField(p["value"])
    if kind == "bump":
        return BumpField(
            base=p["base"],
            amp=p["amp"],
            center1=p["center1"],
            width1=p["width1"],
            center2=p["center2"],
            width2=p["width2"],
        )
    return StepField(left=p["left"], right=p["right"], position=p["position"])


def _build_a0(kind: str, p: dict):
    if kind == "constant":
        return ConstantEdge(p["value"])
    return BumpEdge(
        base=p["base"], amp=p["amp"], center=p["center"], width=p["width"]
    )


def _build_spec(sc: Scenario, u0_kind: str, u0_params: dict):
    u0 = _build_u0(u0_kind, u0_params)
    a0 = _build_a0(sc.a0_kind, sc.a0_params)
    a0_top = (
        None if sc.a0_top_value is None else ConstantEdge(sc.a0_top_value)
    )
    kwargs = dict(sc.model_params)
    try:
        if sc.family == "tadmor_tao":
            return tadmor_tao(
                kwargs.pop("ell"),
                kwargs.pop("n"),
                a0=a0,
                u0=u0,
                a0_top=a0_top,
                condition=sc.condition,
                **kwargs,
            )
        return pinned(
            kwargs.pop("p"),
            kwargs.pop("q"),
            a0=a0,
            u0=u0,
            a0_top=a0_top,
            condition=sc.condition,
            **kwargs,
        )
    except ModelError as exc:
        raise ScenarioError(f"[model] {exc}") from exc


def build_problem(sc: Scenario):
    """Scenario -> (ProblemSpec, Grid, SolverConfig).

    Uses the single eps when set; a sweep scenario (eps_list) gets its
    largest viscosity here and the list is read by the sweep driver.
    """
    try:
        grid = build_grid(
            GridSpec(n1=sc.n1, n2=sc.n2, extent1=sc.extent1, extent2=sc.extent2)
        )
    except ValueError as exc:
        raise ScenarioError(f"[grid] {exc}") from exc
    spec = _build_spec(sc, sc.u0_kind, sc.u0_params)
    eps = sc.eps if sc.eps is not None else max(sc.eps_list)
    try:
        config = SolverConfig(
            t_end=sc.t_end,
            eps=eps,
            cfl=sc.cfl,
            snapshot_times=sc.snapshots,
            store_all=sc.store_all,
            gamma1_mode=sc.gamma1_mode,
        )
    except ValueError as exc:
        raise ScenarioError(f"[solver] {exc}") from exc
    return spec, grid, config


def build_problem_b(sc: Scenario):
    """The second initial-data block as its own ProblemSpec."""
    if sc.u0b_kind is None:
        raise ScenarioError("scenario has no second initial-data block")
    return _build_spec(sc, sc.u0b_kind, sc.u0b_params)

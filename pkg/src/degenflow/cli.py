"""Command-line front end.

Subcommands map one-to-one onto the library layers: run (time stepping
to a manifest), sweep-eps (viscosity ladder), verify (checks on a fresh
run or a stored manifest), trace (near-wall profiles), contract (paired
runs), audit (closed-form model validation, no stepping).

Exit codes: 0 all checks passed, 1 a check failed or the run itself
broke down, 2 bad usage or bad configuration.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import figures
from .formats import (
    MANIFEST_MAGIC,
    FormatError,
    read_run,
    write_report,
    write_run,
    write_sweep,
)
from .model import (
    nondegeneracy_scan,
    validate_ellipticity,
    validate_flux_pinning,
    check_structure,
)
from .scenario import (
    ScenarioError,
    build_problem,
    build_problem_b,
    parse_scenario,
    serialize_scenario,
)
from .solver import SolverError, l1_distance, run, viscosity_continuation
from .trace import extract_trace_profile, time_zero_trace
from .verify import CheckEntry, VerificationReport, run_verification

PROG = "degenflow"


def _load_scenario(path: str):
    text = Path(path).read_text()
    sc = parse_scenario(text)
    return sc, serialize_scenario(sc)


def _outdir(args) -> Path:
    if args.outdir is not None:
        out = Path(args.outdir)
    else:
        out = Path.cwd() / (Path(args.path).stem + "_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _thread_count() -> int:
    raw = os.environ.get("DEGENFLOW_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ScenarioError(f"DEGENFLOW_THREADS is not an integer: {raw!r}") from None
    return max(1, n)


def _print_entries(entries) -> None:
    for e in entries:
        print(f"{e.check_id} {e.status} {float(e.defect)!r} {float(e.tolerance)!r}")


def _finish(outdir: Path, entries, args, manifest_hash=None) -> int:
    """Write the report (and its figure), echo it, return the exit code."""
    report = VerificationReport(list(entries))
    write_report(outdir / "report.txt", report.entries, manifest_hash)
    if not args.no_figures:
        figures.report_scatter(outdir / "report.png", report.entries)
    _print_entries(report.entries)
    failures = report.failures
    if failures:
        print(f"{len(failures)} check(s) failed", file=sys.stderr)
        return 1
    return 0


def _require_single_eps(sc, what: str):
    if sc.eps is None:
        raise ScenarioError(f"{what} needs a single eps; eps_list is for sweep-eps")


def _cmd_run(args) -> int:
    sc, canon = _load_scenario(args.path)
    _require_single_eps(sc, "run")
    spec, grid, config = build_problem(sc)
    art = run(spec, grid, config)
    outdir = _outdir(args)
    manifest = write_run(outdir, canon, art)
    if not args.no_figures:
        figures.field_heatmap(outdir / "state.png", grid, art.final(), art.times[-1])
    print(f"wrote {manifest} ({len(art.snapshots)} snapshots, {len(art.dt_history)} steps)")
    return 0


def _cmd_sweep(args) -> int:
    sc, _ = _load_scenario(args.path)
    if sc.eps_list is None:
        raise ScenarioError("sweep-eps needs eps_list in [solver]")
    spec, grid, config = build_problem(sc)
    rows, _ = viscosity_continuation(
        spec, grid, config, sc.eps_list, threads=_thread_count()
    )
    outdir = _outdir(args)
    write_sweep(outdir / "sweep.tsv", rows)
    if not args.no_figures:
        figures.sweep_figure(outdir / "sweep.png", rows)

    entries = []
    gaps = [r.l1_gap_next for r in rows if r.l1_gap_next is not None]
    if len(gaps) >= 2:
        worst = max(b - a for a, b in zip(gaps[:-1], gaps[1:]))
        status = "pass" if worst < 0 else "fail"
        entries.append(CheckEntry("sweep:cauchy", status, worst, 0.0))
    else:
        entries.append(CheckEntry("sweep:cauchy", "info", gaps[0] if gaps else 0.0, 0.0))
    entries.append(
        CheckEntry("sweep:energy:grad", "info", max(r.eps_grad_sq for r in rows), 0.0)
    )
    entries.append(
        CheckEntry("sweep:energy:bgrad", "info", max(r.bgrad_sq for r in rows), 0.0)
    )
    return _finish(outdir, entries, args)


def _cmd_verify(args) -> int:
    first = ""
    with open(args.path) as fh:
        first = fh.readline().rstrip("\n")
    outdir = _outdir(args)

    if first == MANIFEST_MAGIC:
        stored = read_run(args.path)
        sc = parse_scenario(stored.scenario_text)
        spec, grid, _ = build_problem(sc)
        report = run_verification(
            spec, grid, stored.artifacts, tol_scale=args.tol_scale, checks=sc.checks
        )
        intact = CheckEntry(
            "manifest:intact",
            "pass" if stored.intact else "fail",
            0.0 if stored.intact else 1.0,
            0.0,
        )
        return _finish(
            outdir,
            report.entries + [intact],
            args,
            manifest_hash=stored.computed_hash,
        )

    sc, _ = _load_scenario(args.path)
    _require_single_eps(sc, "verify")
    spec, grid, config = build_problem(sc)
    art = run(spec, grid, replace(config, store_all=True))
    report = run_verification(
        spec, grid, art, tol_scale=args.tol_scale, checks=sc.checks
    )
    return _finish(outdir, report.entries, args)


def _cmd_trace(args) -> int:
    sc, _ = _load_scenario(args.path)
    _require_single_eps(sc, "trace")
    spec, grid, config = build_problem(sc)
    art = run(spec, grid, replace(config, store_all=True))
    depths = tuple((m + 0.5) * grid.dx1 for m in (3, 2, 1, 0))
    profile = extract_trace_profile(grid, art, depths)
    outdir = _outdir(args)
    if not args.no_figures:
        figures.trace_figure(outdir / "trace.png", profile, grid)

    entries = []
    for i, gap in enumerate(profile.l1_gaps):
        entries.append(CheckEntry(f"trace:gap{i}", "info", gap, 0.0))
    if len(profile.l1_gaps) >= 2:
        worst = max(
            b - 1.1 * a for a, b in zip(profile.l1_gaps[:-1], profile.l1_gaps[1:])
        )
        status = "pass" if worst <= 0 else "fail"
        entries.append(CheckEntry("trace:monotone", status, worst, 0.0))
    k_mid = 0.5 * (spec.u_min + spec.u_max)
    entries += time_zero_trace(art, k_mid, tol_scale=args.tol_scale)
    return _finish(outdir, entries, args)


def _cmd_contract(args) -> int:
    sc, _ = _load_scenario(args.path)
    _require_single_eps(sc, "contract")
    if sc.u0b_kind is None:
        raise ScenarioError("contract needs a u0b_* block in [data]")
    spec_a, grid, config = build_problem(sc)
    spec_b = build_problem_b(sc)
    config = replace(config, store_all=True)
    art_a = run(spec_a, grid, config)
    art_b = run(spec_b, grid, config)
    report = run_verification(
        spec_a,
        grid,
        art_a,
        tol_scale=args.tol_scale,
        checks=(),
        art_b=art_b,
        same_boundary_data=True,
    )
    dists = [
        l1_distance(a, b, grid) for a, b in zip(art_a.snapshots, art_b.snapshots)
    ]
    entries = list(report.entries)
    entries.append(CheckEntry("contract:dist_start", "info", dists[0], 0.0))
    entries.append(CheckEntry("contract:dist_end", "info", dists[-1], 0.0))
    outdir = _outdir(args)
    if not args.no_figures:
        figures.contraction_figure(outdir / "contract.png", art_a.times, dists)
    return _finish(outdir, entries, args)


def _cmd_audit(args) -> int:
    sc, _ = _load_scenario(args.path)
    spec, _, _ = build_problem(sc)
    entries = []

    ell = validate_ellipticity(spec)
    margin = min(ell.details["lower_margin"], ell.details["upper_margin"])
    entries.append(
        CheckEntry(
            "audit:ellipticity",
            "pass" if ell.passed else "fail",
            margin,
            ell.details["tol"],
        )
    )
    pin = validate_flux_pinning(spec)
    resid = max(pin.details["residual_low"], pin.details["residual_high"])
    entries.append(
        CheckEntry(
            "audit:pinning",
            "pass" if pin.passed else "fail",
            resid,
            pin.details["tol"],
        )
    )
    struct = check_structure(spec)
    entries.append(
        CheckEntry(
            "audit:structure",
            "pass" if struct.passed else "fail",
            0.0 if struct.passed else 1.0,
            0.0,
        )
    )
    scan = nondegeneracy_scan(spec, seed=args.seed)
    entries.append(
        CheckEntry(
            "audit:nondeg",
            "pass" if scan.max_fraction <= 0.05 else "fail",
            scan.max_fraction,
            0.05,
        )
    )
    tight = nondegeneracy_scan(spec, seed=args.seed, threshold=1e-5)
    entries.append(CheckEntry("audit:nondeg:tight", "info", tight.max_fraction, 0.05))
    return _finish(_outdir(args), entries, args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="finite-volume runs and entropy-solution checks "
        "for a degenerate advection-diffusion problem",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tol=False, seed=False):
        p.add_argument("path", help="scenario file (or manifest, for verify)")
        p.add_argument("-o", "--outdir", default=None, help="artifact directory")
        p.add_argument(
            "--no-figures", action="store_true", help="skip figure rendering"
        )
        if tol:
            p.add_argument(
                "--tol-scale",
                type=float,
                default=1.0,
                help="multiply every check tolerance by this factor",
            )
        if seed:
            p.add_argument(
                "--seed", type=int, default=0, help="direction-sampling seed"
            )

    p = sub.add_parser("run", help="advance a scenario and store the run")
    common(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep-eps", help="run a decreasing viscosity ladder")
    common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="run checks on a scenario or stored manifest")
    common(p, tol=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("trace", help="near-wall profiles and initial-time traces")
    common(p, tol=True)
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("contract", help="compare two runs sharing boundary data")
    common(p, tol=True)
    p.set_defaults(func=_cmd_contract)

    p = sub.add_parser("audit", help="closed-form model checks, no time stepping")
    common(p, seed=True)
    p.set_defaults(func=_cmd_audit)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    except (ScenarioError, FormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

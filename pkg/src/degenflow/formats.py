"""Plain-text artifacts: snapshots, run manifests, reports, sweep tables.

Every float is written with repr() so a read-back reproduces the exact
bits, which is what makes manifests re-verifiable: the hash stored in a
manifest covers the scenario text plus the raw bytes of every snapshot
file, and recomputing it detects any edit to either.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .solver import RunArtifacts, SweepRow
from .verify import CheckEntry

MANIFEST_MAGIC = "degenflow-manifest 1"
MANIFEST_NAME = "run.manifest"
SWEEP_HEADER = "eps\tl1_gap_next\teps_grad_sq\tbgrad_sq"


class FormatError(ValueError):
    pass


# ---------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------


def write_snapshot(path, t: float, field: np.ndarray) -> None:
    field = np.asarray(field, dtype=float)
    if field.ndim != 2:
        raise FormatError("snapshot field must be 2-D")
    n1, n2 = field.shape
    lines = [f"t {float(t)!r} n1 {n1} n2 {n2}"]
    for row in field:
        lines.append(" ".join(repr(v) for v in row.tolist()))
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot(path) -> tuple[float, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty snapshot")
    head = lines[0].split()
    if len(head) != 6 or head[0] != "t" or head[2] != "n1" or head[4] != "n2":
        raise FormatError(f"{path}: bad snapshot header {lines[0]!r}")
    t = float(head[1])
    n1, n2 = int(head[3]), int(head[5])
    if len(lines) != 1 + n1:
        raise FormatError(f"{path}: expected {n1} rows, found {len(lines) - 1}")
    field = np.empty((n1, n2))
    for i, line in enumerate(lines[1:]):
        row = line.split()
        if len(row) != n2:
            raise FormatError(f"{path}: row {i} has {len(row)} values, not {n2}")
        field[i] = [float(v) for v in row]
    return t, field


# ---------------------------------------------------------------------
# run manifests
# ---------------------------------------------------------------------


def _manifest_hash(scenario_text: str, snapshot_paths) -> str:
    h = hashlib.sha256()
    h.update(scenario_text.encode())
    for p in snapshot_paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def _bool_str(flag: bool) -> str:
    return "true" if flag else "false"


def write_run(outdir, scenario_text: str, art: RunArtifacts) -> Path:
    """Write snapshots plus a manifest tying them together; returns its path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if any(line.strip() == "scenario-end" for line in scenario_text.splitlines()):
        raise FormatError("scenario text collides with the manifest delimiter")

    snap_names = []
    for step, t, field in zip(art.snapshot_steps, art.times, art.snapshots):
        name = f"snap_{step:08d}.txt"
        write_snapshot(outdir / name, t, field)
        snap_names.append(name)

    lines = [MANIFEST_MAGIC, "scenario-begin"]
    lines.extend(scenario_text.splitlines())
    lines.append("scenario-end")
    lines.append(f"eps {float(art.eps)!r}")
    lines.append(f"cfl {float(art.cfl)!r}")
    lines.append(f"gamma1_mode {art.gamma1_mode}")
    lines.append(f"every_step {_bool_str(art.every_step)}")
    for i in range(len(art.dt_history)):
        row = (
            art.dt_history[i],
            art.min_history[i],
            art.max_history[i],
            art.noflow_flux[i],
            art.dirichlet_flux[i],
        )
        lines.append(f"step {i + 1} " + " ".join(repr(float(v)) for v in row))
    for step, t, name in zip(art.snapshot_steps, art.times, snap_names):
        lines.append(f"snapshot {step} {float(t)!r} {name}")
    digest = _manifest_hash(scenario_text, [outdir / n for n in snap_names])
    lines.append(f"hash {digest}")

    path = outdir / MANIFEST_NAME
    path.write_text("\n".join(lines) + "\n")
    return path


@dataclass
class StoredRun:
    scenario_text: str
    artifacts: RunArtifacts
    stored_hash: str
    computed_hash: str

    @property
    def intact(self) -> bool:
        return self.stored_hash == self.computed_hash


def read_run(manifest_path) -> StoredRun:
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    lines = manifest_path.read_text().splitlines()
    if not lines or lines[0] != MANIFEST_MAGIC:
        raise FormatError(f"{manifest_path}: not a manifest")
    if len(lines) < 2 or lines[1] != "scenario-begin":
        raise FormatError(f"{manifest_path}: missing scenario block")
    try:
        end = lines.index("scenario-end", 2)
    except ValueError:
        raise FormatError(f"{manifest_path}: unterminated scenario block") from None
    scenario_text = "\n".join(lines[2:end]) + "\n"

    fields = {}
    steps = []
    snaps = []
    stored_hash = None
    for line in lines[end + 1 :]:
        if not line.strip():
            continue
        parts = line.split()
        key = parts[0]
        if key == "step":
            if len(parts) != 7:
                raise FormatError(f"{manifest_path}: bad step line {line!r}")
            steps.append(tuple(float(v) for v in parts[2:]))
        elif key == "snapshot":
            if len(parts) != 4:
                raise FormatError(f"{manifest_path}: bad snapshot line {line!r}")
            snaps.append((int(parts[1]), float(parts[2]), parts[3]))
        elif key == "hash":
            stored_hash = parts[1]
        elif key in ("eps", "cfl", "gamma1_mode", "every_step"):
            fields[key] = parts[1]
        else:
            raise FormatError(f"{manifest_path}: unknown manifest line {line!r}")
    for key in ("eps", "cfl", "gamma1_mode", "every_step"):
        if key not in fields:
            raise FormatError(f"{manifest_path}: missing {key} line")
    if stored_hash is None:
        raise FormatError(f"{manifest_path}: missing hash line")

    times = []
    arrays = []
    snap_steps = []
    for step_no, t, name in snaps:
        t_file, field = read_snapshot(base / name)
        if t_file != t:
            raise FormatError(f"{manifest_path}: time mismatch for {name}")
        times.append(t)
        arrays.append(field)
        snap_steps.append(step_no)

    art = RunArtifacts(
        times=times,
        snapshots=arrays,
        snapshot_steps=snap_steps,
        dt_history=[s[0] for s in steps],
        min_history=[s[1] for s in steps],
        max_history=[s[2] for s in steps],
        noflow_flux=[s[3] for s in steps],
        dirichlet_flux=[s[4] for s in steps],
        eps=float(fields["eps"]),
        cfl=float(fields["cfl"]),
        gamma1_mode=fields["gamma1_mode"],
        every_step=fields["every_step"] == "true",
    )
    computed = _manifest_hash(scenario_text, [base / s[2] for s in snaps])
    return StoredRun(
        scenario_text=scenario_text,
        artifacts=art,
        stored_hash=stored_hash,
        computed_hash=computed,
    )


# ---------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------


def write_report(path, entries, manifest_hash: str | None = None) -> None:
    lines = [
        f"{e.check_id} {e.status} {float(e.defect)!r} {float(e.tolerance)!r}"
        for e in entries
    ]
    if manifest_hash is not None:
        lines.append(f"manifest-hash {manifest_hash}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_report(path) -> tuple[list[CheckEntry], str | None]:
    entries = []
    manifest_hash = None
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        parts = line.split()
        if parts[0] == "manifest-hash":
            manifest_hash = parts[1]
            continue
        if len(parts) != 4:
            raise FormatError(f"{path}: bad report line {line!r}")
        entries.append(
            CheckEntry(parts[0], parts[1], float(parts[2]), float(parts[3]))
        )
    return entries, manifest_hash


# ---------------------------------------------------------------------
# sweep tables
# ---------------------------------------------------------------------


def write_sweep(path, rows) -> None:
    lines = [SWEEP_HEADER]
    for r in rows:
        gap = "-" if r.l1_gap_next is None else repr(float(r.l1_gap_next))
        lines.append(
            f"{float(r.eps)!r}\t{gap}\t{float(r.eps_grad_sq)!r}\t{float(r.bgrad_sq)!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_sweep(path) -> list[SweepRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != SWEEP_HEADER:
        raise FormatError(f"{path}: bad sweep header")
    rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise FormatError(f"{path}: bad sweep row {line!r}")
        gap = None if parts[1] == "-" else float(parts[1])
        rows.append(
            SweepRow(
                eps=float(parts[0]),
                l1_gap_next=gap,
                eps_grad_sq=float(parts[2]),
                bgrad_sq=float(parts[3]),
            )
        )
    return rows

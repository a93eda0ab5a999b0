"""Axis-aligned product meshes and their boundary structure.

The computational domain is a rectangle viewed as a product of two
intervals.  The two factors play different roles: boundary faces whose
outward normal points along the first axis carry a zero total-flux
(no-flow) condition, faces along the second axis carry imposed boundary
values.  Everything here is cell-centered and exact; no numerics beyond
arithmetic on cell coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Face tags.  "neumann" faces sit on the boundary of the first factor
# (zero total flux), "dirichlet" faces on the boundary of the second
# factor (imposed values, constant extension along the face normal).
NEUMANN = "neumann"
DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class GridSpec:
    """Cell counts and extents of the product mesh.

    ``n1`` cells along the first factor, ``n2`` along the second; both
    must be at least 2 so every cell has an interior face in each
    direction.
    """

    n1: int
    n2: int
    extent1: tuple[float, float] = (0.0, 1.0)
    extent2: tuple[float, float] = (0.0, 1.0)


@dataclass(frozen=True)
class BoundaryFace:
    """One boundary face: owning cell, outward normal, role tag."""

    cell: tuple[int, int]
    axis: int  # axis of the outward normal: 0 = first factor, 1 = second
    sign: int  # -1 low side, +1 high side
    kind: str  # NEUMANN or DIRICHLET


class Grid:
    """Immutable uniform cell-centered mesh over a product rectangle."""

    def __init__(self, spec: GridSpec):
        if spec.n1 < 2 or spec.n2 < 2:
            raise ValueError(
                f"grid needs at least 2 cells per factor, got {spec.n1}x{spec.n2}"
            )
        lo1, hi1 = spec.extent1
        lo2, hi2 = spec.extent2
        if not (hi1 > lo1 and hi2 > lo2):
            raise ValueError("grid extents must be nonempty intervals")
        self.spec = spec
        self.n1 = int(spec.n1)
        self.n2 = int(spec.n2)
        self.extent1 = (float(lo1), float(hi1))
        self.extent2 = (float(lo2), float(hi2))
        self.dx1 = (hi1 - lo1) / self.n1
        self.dx2 = (hi2 - lo2) / self.n2
        self.area = self.dx1 * self.dx2
        self.x1 = lo1 + (np.arange(self.n1) + 0.5) * self.dx1
        self.x2 = lo2 + (np.arange(self.n2) + 0.5) * self.dx2
        self.faces = classify_faces(self)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid of cell centers, shape (n1, n2) each."""
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    def neighbors(self, i: int, j: int) -> list[tuple[int, int]]:
        """Face-adjacent cells of (i, j)."""
        out = []
        if i > 0:
            out.append((i - 1, j))
        if i < self.n1 - 1:
            out.append((i + 1, j))
        if j > 0:
            out.append((i, j - 1))
        if j < self.n2 - 1:
            out.append((i, j + 1))
        return out

    def __repr__(self) -> str:  # pragma: no cover
        return f"Grid({self.n1}x{self.n2}, {self.extent1}x{self.extent2})"


def build_grid(spec: GridSpec) -> Grid:
    """Construct the mesh; rejects degenerate cell counts or extents."""
    return Grid(spec)


def classify_faces(grid: Grid) -> list[BoundaryFace]:
    """Every boundary face exactly once, tagged by its role.

    Faces with an x1-directed normal (2 * n2 of them) are no-flow faces;
    faces with an x2-directed normal (2 * n1) carry boundary values.
    """
    faces: list[BoundaryFace] = []
    for j in range(grid.n2):
        faces.append(BoundaryFace((0, j), 0, -1, NEUMANN))
        faces.append(BoundaryFace((grid.n1 - 1, j), 0, +1, NEUMANN))
    for i in range(grid.n1):
        faces.append(BoundaryFace((i, 0), 1, -1, DIRICHLET))
        faces.append(BoundaryFace((i, grid.n2 - 1), 1, +1, DIRICHLET))
    return faces


@dataclass(frozen=True)
class LayerField:
    """Cutoff profile attached to one factor's boundary.

    ``values[i, j] = min(delta, h(x)) / delta`` where h is the distance
    from the cell center to the chosen factor's boundary.  Values are 1
    away from that boundary and fall off linearly across a band of width
    ``delta``, with slope of magnitude 1/delta inside the band.
    """

    values: np.ndarray
    delta: float
    axis: int


def boundary_layer(grid: Grid, delta: float, axis: int = 1) -> LayerField:
    """Linear cutoff of the distance to one factor's boundary.

    axis=0 measures distance to the ends of the first interval, axis=1
    (default) to the ends of the second.  Requires 0 < delta <= half the
    corresponding extent so the profile reaches 1 somewhere.
    """
    if axis not in (0, 1):
        raise ValueError(f"axis must be 0 or 1, got {axis}")
    lo, hi = grid.extent1 if axis == 0 else grid.extent2
    half = 0.5 * (hi - lo)
    if not (0.0 < delta <= half):
        raise ValueError(f"delta must lie in (0, {half}], got {delta}")
    coord = grid.x1 if axis == 0 else grid.x2
    h = np.minimum(coord - lo, hi - coord)
    zeta_1d = np.clip(h / delta, 0.0, 1.0)
    if axis == 0:
        values = np.repeat(zeta_1d[:, None], grid.n2, axis=1)
    else:
        values = np.repeat(zeta_1d[None, :], grid.n1, axis=0)
    return LayerField(values=values, delta=float(delta), axis=axis)


@dataclass(frozen=True)
class DeformationLayer:
    """Cell columns at depth s inward from both ends of the first factor.

    ``low`` is the column index nearest depth s from the low end,
    ``high`` the mirrored column from the high end.
    """

    depth: float
    low: int
    high: int

    def cells(self, grid: Grid) -> list[tuple[int, int]]:
        """Ordered cells on the deformed surface: low column then high."""
        return [(self.low, j) for j in range(grid.n2)] + [
            (self.high, j) for j in range(grid.n2)
        ]


def deformation_layers(grid: Grid, s_values) -> list[DeformationLayer]:
    """Columns of cells tracking inward deformations of the no-flow walls.

    Each depth s in (0, half-extent) is snapped to the column whose band
    [m*dx1, (m+1)*dx1) contains it, so s = dx1/2 picks the outermost
    columns and s = 3*dx1/2 the second ones.
    """
    lo1, hi1 = grid.extent1
    half = 0.5 * (hi1 - lo1)
    layers = []
    for s in s_values:
        s = float(s)
        if not (0.0 < s < half):
            raise ValueError(
                f"deformation depth must lie in (0, {half}), got {s}"
            )
        col = int(np.floor(s / grid.dx1))
        col = min(col, grid.n1 - 1)
        layers.append(DeformationLayer(depth=s, low=col, high=grid.n1 - 1 - col))
    return layers

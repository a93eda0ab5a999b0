import numpy as np
import pytest

from degenflow.domain import (
    DIRICHLET,
    NEUMANN,
    GridSpec,
    boundary_layer,
    build_grid,
    deformation_layers,
)


def test_grid_geometry():
    grid = build_grid(GridSpec(8, 4, (0.0, 2.0), (-1.0, 1.0)))
    assert grid.shape == (8, 4)
    assert grid.dx1 == pytest.approx(0.25)
    assert grid.dx2 == pytest.approx(0.5)
    assert grid.area == pytest.approx(0.125)
    np.testing.assert_allclose(grid.x1[0], 0.125)
    np.testing.assert_allclose(grid.x1[-1], 1.875)
    np.testing.assert_allclose(grid.x2, [-0.75, -0.25, 0.25, 0.75])


def test_grid_centers_shape():
    grid = build_grid(GridSpec(5, 3))
    X1, X2 = grid.centers()
    assert X1.shape == (5, 3)
    # first index walks x1, second walks x2
    np.testing.assert_allclose(X1[:, 0], grid.x1)
    np.testing.assert_allclose(X2[0, :], grid.x2)


@pytest.mark.parametrize("n1,n2", [(1, 8), (8, 1), (0, 4)])
def test_grid_rejects_thin_factors(n1, n2):
    with pytest.raises(ValueError):
        build_grid(GridSpec(n1, n2))


def test_grid_rejects_empty_extent():
    with pytest.raises(ValueError):
        build_grid(GridSpec(4, 4, (1.0, 1.0)))


def test_face_classification_counts():
    grid = build_grid(GridSpec(6, 9))
    kinds = [f.kind for f in grid.faces]
    assert kinds.count(NEUMANN) == 2 * 9
    assert kinds.count(DIRICHLET) == 2 * 6
    # every boundary face exactly once
    seen = {(f.cell, f.axis, f.sign) for f in grid.faces}
    assert len(seen) == len(grid.faces)


def test_neighbors_interior_and_corner():
    grid = build_grid(GridSpec(4, 4))
    assert len(grid.neighbors(2, 2)) == 4
    assert len(grid.neighbors(0, 0)) == 2
    assert set(grid.neighbors(0, 0)) == {(1, 0), (0, 1)}


def test_boundary_layer_mass_and_range():
    grid = build_grid(GridSpec(32, 32))
    layer = boundary_layer(grid, delta=0.25, axis=1)
    vals = layer.values
    assert vals.min() >= 0.0 and vals.max() <= 1.0
    # vanishes on the boundary cells, saturates inside
    assert vals[:, 0].max() < 0.1
    assert vals[:, 16].min() > 0.9


def test_deformation_layers_column_snapping():
    grid = build_grid(GridSpec(16, 8))
    layers = deformation_layers(grid, [3.5 * grid.dx1, 0.5 * grid.dx1])
    assert layers[0].low == 3 and layers[0].high == 12
    assert layers[1].low == 0 and layers[1].high == 15


def test_deformation_layers_reject_deep_or_zero():
    grid = build_grid(GridSpec(16, 8))
    with pytest.raises(ValueError):
        deformation_layers(grid, [0.6])  # past the half-width
    with pytest.raises(ValueError):
        deformation_layers(grid, [0.0])

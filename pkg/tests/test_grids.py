import numpy
import pytest
from jax import numpy as np

from bayesbinom.grids import Clipped, Grid, build_histogram, build_indexer, centers

lower_2d = (1.0, 0.9)
upper_2d = (1.2, 1.0)
shape_2d = (4, 5)


def test_Grid_constructor():
    # Default constructor
    grid = Grid(lower_2d, upper_2d, shape_2d)
    # Parametric constructor
    clipped_grid = Grid[Clipped](lower_2d, upper_2d, shape_2d)

    assert type(grid) is type(clipped_grid)
    assert repr(grid) == repr(clipped_grid) == "Grid[Clipped] (4 x 5)"
    assert numpy.allclose(grid.spacing, (0.05, 0.02))
    assert grid.lower.tolist() == list(lower_2d)
    assert grid.shape.tolist() == list(shape_2d)

    # Test constructor exceptions
    with pytest.raises(TypeError):
        Grid[bool](lower_2d, upper_2d, shape_2d)
    with pytest.raises(TypeError):
        Grid(lower_2d, upper_2d, shape_2d, clipped=True)
    with pytest.raises(ValueError):
        Grid(lower_2d, upper_2d, (0, 5))
    with pytest.raises(ValueError):
        Grid(upper_2d, lower_2d, shape_2d)
    with pytest.raises(ValueError):
        Grid((1.0, 0.9), (1.0, 1.0), shape_2d)


def test_grid_indexing():
    get_index = build_indexer(Grid[Clipped](lower_2d, upper_2d, shape_2d))

    inside = np.array([1.01, 0.99])
    below = np.array([0.5, 0.95])
    above = np.array([1.1, 1.5])

    assert get_index(inside).tolist() == [[0, 4]]
    # Outside points go to the closest edge bin
    assert get_index(below).tolist() == [[0, 2]]
    assert get_index(above).tolist() == [[2, 4]]
    # One row per point
    points = np.stack([inside, below, above])
    assert get_index(points).tolist() == [[0, 4], [0, 2], [2, 4]]


def test_histogram():
    points = np.array([[1.01, 0.99], [1.01, 0.991], [1.19, 0.91], [5.0, 5.0]])

    counts = build_histogram(Grid[Clipped](lower_2d, upper_2d, shape_2d))(points)

    assert counts.shape == shape_2d
    assert float(counts.sum()) == 4.0
    assert float(counts[0, 4]) == 2.0
    assert float(counts[3, 0]) == 1.0
    assert float(counts[3, 4]) == 1.0


def test_centers():
    cu, cd = centers(Grid(lower_2d, upper_2d, shape_2d))
    assert numpy.allclose(cu, (1.025, 1.075, 1.125, 1.175))
    assert numpy.allclose(cd, (0.91, 0.93, 0.95, 0.97, 0.99))

    # Zero-width axes collapse to a single bin centered at the common value
    grid = Grid[Clipped]((1.03, 0.9), (1.03, 1.0), (1, 5))
    cu, _ = centers(grid)
    assert cu.tolist() == [1.03]
    assert build_indexer(grid)(np.array([1.03, 0.95])).tolist() == [[0, 2]]

# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Rectangular grids of equally sized bins, used to histogram draws of tree parameters.
"""

from dataclasses import dataclass

from jax import jit
from jax import numpy as np
from plum import parametric, type_parameter

from bayesbinom.utils import JaxArray, dispatch


class GridType:
    pass


class Clipped(GridType):
    pass


@parametric
@dataclass(eq=False)
class Grid:
    """
    Axis-aligned grid over `[lower, upper]` with `shape[i]` bins along axis `i`.

    Points outside of a `Grid[Clipped]` are assigned to the nearest edge bin. An axis with
    `lower == upper` must have a single bin, whose center is that common value.
    """

    lower: JaxArray
    upper: JaxArray
    shape: JaxArray
    size: JaxArray

    @classmethod
    def __infer_type_parameter__(cls, *args, **kwargs):
        return Clipped

    def __init__(self, lower, upper, shape):
        self.__check_init_invariants__()
        shape = np.asarray(shape, dtype=np.int64)
        n = shape.size
        self.lower = np.asarray(lower, dtype=np.float64).reshape(n)
        self.upper = np.asarray(upper, dtype=np.float64).reshape(n)
        self.shape = shape.reshape(n)
        self.size = self.upper - self.lower
        if not bool(np.all(self.shape >= 1)):
            raise ValueError(f"Every axis needs at least one bin (got shape {tuple(shape)})")
        if not bool(np.all(self.size >= 0)):
            raise ValueError("The upper corner of a grid cannot be below its lower corner")
        if not bool(np.all((self.size > 0) | (self.shape == 1))):
            raise ValueError("Axes of zero width must have a single bin")

    def __check_init_invariants__(self):
        T = type_parameter(type(self))
        if not (issubclass(type(T), type) and issubclass(T, GridType)):
            raise TypeError("Type parameter must be a subclass of GridType.")

    def __repr__(self):
        T = type_parameter(type(self))
        return f"Grid[{T.__name__}] ({' x '.join(map(str, self.shape))})"

    @property
    def spacing(self):
        return self.size / self.shape


def _raw_index(grid, x):
    h = np.where(grid.size > 0, grid.spacing, 1.0)
    idx = (x.reshape(-1, grid.shape.size) - grid.lower) // h
    return np.where(grid.size > 0, idx, 0)


@dispatch
def build_indexer(grid: Grid[Clipped]):
    """
    Returns a function that maps points `x` (one per row) to the integer indices of the
    bins containing them. Points outside the grid are assigned to the closest edge bin.
    """

    def get_index(x):
        return np.clip(_raw_index(grid, x), 0, grid.shape - 1).astype(np.int64)

    return jit(get_index)


@dispatch
def build_histogram(grid: Grid):
    """
    Returns a function that counts the points `x` (one per row) falling in each bin.
    """
    get_index = build_indexer(grid)
    shape = tuple(int(n) for n in grid.shape)

    def count(x):
        idx = get_index(x)
        return np.zeros(shape).at[tuple(idx.T)].add(1.0, mode="drop")

    return jit(count)


@dispatch
def centers(grid: Grid):
    """
    Bin centers along each axis. Zero-width axes give their common value exactly.
    """
    return tuple(
        np.where(size > 0, lo + (np.arange(int(n)) + 0.5) * size / n, lo)
        for lo, size, n in zip(grid.lower, grid.size, grid.shape)
    )

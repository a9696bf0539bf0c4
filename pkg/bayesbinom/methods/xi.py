# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
ξ method: prices from the posterior predictive distribution of the tree parameters.

Tree parameterizations are drawn by first picking θ uniformly from the chain and then
ξ | θ. The draws are histogrammed on an `M x M` grid to approximate π(ξ | data), and
each price sample values one tree at a bin center resampled according to the bin
masses. Prices are therefore unconditional on θ.

Setting `bin_free` prices the raw draws directly instead.
"""

from typing import NamedTuple

import numpy
from jax import jit
from jax import numpy as np
from jax import random, vmap

from bayesbinom.grids import Clipped, Grid, build_histogram, centers
from bayesbinom.mcmc.sampler import Chain
from bayesbinom.methods.core import (
    PriceDistribution,
    PropagationMethod,
    chain_arrays,
    check_count,
    check_rates,
    pick_theta,
    price_distribution,
    sample_xi,
)
from bayesbinom.methods.utils import TaskConfig, run_tasks, sample_keys
from bayesbinom.trees import MarketFrame, build_pricer
from bayesbinom.utils import dispatch

DEFAULT_QUANTILES = (0.001, 0.999)


class XiGrid(NamedTuple):
    """
    Binned approximation of π(ξ | data).

    bin_centers: numpy.ndarray
        `(u, d)` center of every bin, one row per bin.

    masses: numpy.ndarray
        Fraction of draws falling in each bin.

    bins_per_axis: int
        Requested number of bins per axis. Axes on which every draw is identical
        collapse to a single bin.

    grid: Grid
        The underlying `Grid[Clipped]`.

    degenerate: bool
        Whether all draws were identical.
    """

    bin_centers: numpy.ndarray
    masses: numpy.ndarray
    bins_per_axis: int
    grid: Grid
    degenerate: bool


class XiMethod(PropagationMethod):
    """
    Parameters
    ----------

    draws: int = 5000
        Number of ξ draws, which is also the number of price samples.

    bins: int = 100
        Bins per axis of the histogram of ξ.

    quantiles: tuple = (0.001, 0.999)
        Quantile range of the draws covered by the grid along each axis. Draws outside
        of it are assigned to the edge bins.

    bin_free: bool = False
        Price the raw ξ draws instead of resampled bin centers.
    """

    tag = "xi"

    def __init__(
        self,
        draws: int = 5000,
        bins: int = 100,
        quantiles=DEFAULT_QUANTILES,
        bin_free: bool = False,
        **kwargs,
    ):
        super().__init__(**kwargs)
        self.draws = check_count(draws, "draws")
        self.bins = check_count(bins, "bins")
        self.quantiles = tuple(quantiles)
        self.bin_free = bin_free


def build_xi_grid(u, d, bins: int = 100, quantiles=DEFAULT_QUANTILES):
    """
    Histograms the draws `(u, d)` on a `bins x bins` grid spanning the `quantiles`
    range of each axis.
    """
    bins = check_count(bins, "bins")
    lo, hi = quantiles
    if not 0 <= lo < hi <= 1:
        raise ValueError(f"Invalid quantile range {quantiles}")

    points = numpy.column_stack([numpy.asarray(u), numpy.asarray(d)]).astype(numpy.float64)
    if len(points) == 0:
        raise ValueError("Cannot build a grid without draws")
    lower, upper = numpy.quantile(points, [lo, hi], axis=0)
    upper = numpy.maximum(upper, lower)
    shape = numpy.where(upper > lower, bins, 1)

    grid = Grid[Clipped](lower, upper, shape)
    counts = numpy.asarray(build_histogram(grid)(np.asarray(points)))
    cu, cd = (numpy.asarray(c) for c in centers(grid))
    mesh_u, mesh_d = numpy.meshgrid(cu, cd, indexing="ij")

    degenerate = bool(numpy.all(points == points[0]))
    return XiGrid(
        numpy.column_stack([mesh_u.ravel(), mesh_d.ravel()]),
        counts.ravel() / len(points),
        bins,
        grid,
        degenerate,
    )


def grid_expectation(grid: XiGrid, frame: MarketFrame):
    """
    Mass-weighted price over the bin centers, the exact expectation under the binned
    approximation of π(ξ | data).
    """
    occupied = grid.masses > 0
    u, d = grid.bin_centers[occupied].T
    prices = numpy.asarray(build_pricer(frame)(u, d))
    return float(numpy.sum(grid.masses[occupied] * prices))


def draw_xi(chain: Chain, draws: int, key, config: TaskConfig = TaskConfig()):
    """
    Draws `draws` tree parameterizations from the posterior predictive of `chain`.
    """
    samples = chain_arrays(chain)
    r_f = chain.r_f

    def predictive(k):
        key_pick, key_xi = random.split(k)
        return sample_xi(key_xi, pick_theta(key_pick, samples), r_f)

    @jit
    def evaluate(indices):
        return vmap(predictive)(sample_keys(key, indices))

    return run_tasks(evaluate, draws, config)


def xi_method(
    chain: Chain,
    frame: MarketFrame,
    draws: int = 5000,
    bins: int = 100,
    key=None,
    quantiles=DEFAULT_QUANTILES,
    bin_free: bool = False,
    config: TaskConfig = TaskConfig(),
):  # pylint: disable=too-many-arguments
    """
    Returns the `XiGrid` built from the draws and the `PriceDistribution` of the method.
    """
    draws = check_count(draws, "draws")
    if check_count(bins, "bins") < 2:
        raise ValueError(f"The ξ method needs at least two bins per axis (got {bins})")
    check_rates(chain, frame)
    key = random.PRNGKey(0) if key is None else key
    key_draw, key_resample = random.split(key)

    u, d = draw_xi(chain, draws, key_draw, config)
    grid = build_xi_grid(u, d, bins, quantiles)
    pricer = build_pricer(frame)

    if bin_free:
        prices = numpy.asarray(pricer(u, d))
    else:
        occupied = numpy.flatnonzero(grid.masses > 0)
        center_u, center_d = (np.asarray(c) for c in grid.bin_centers[occupied].T)
        masses = np.asarray(grid.masses[occupied])

        @jit
        def evaluate(indices):
            picks = vmap(lambda k: random.choice(k, masses.size, p=masses))(
                sample_keys(key_resample, indices)
            )
            return pricer(center_u[picks], center_d[picks])

        prices = run_tasks(evaluate, draws, config)

    return grid, price_distribution(prices, "xi", grid)


@dispatch
def propagate(  # noqa: F811 # pylint: disable=C0116,E0102
    method: XiMethod,
    chain: Chain,
    frame: MarketFrame,
    key,
    config: TaskConfig = TaskConfig(),
) -> PriceDistribution:
    _, dist = xi_method(
        chain, frame, method.draws, method.bins, key, method.quantiles, method.bin_free, config
    )
    return dist

# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

# flake8: noqa F401
# pylint: disable=unused-import,relative-beyond-top-level

"""
Propagation Methods
===================

A propagation method turns a calibration of the binomial tree into a distribution of
option prices. There are two families.

- Bayesian methods take a posterior :py:class:`bayesbinom.mcmc.Chain`:
  :py:class:`theta.ThetaMethod`, :py:class:`xi.XiMethod` and
  :py:class:`expected_xi.ExpectedXiMethod`.
- Baselines take the observed :py:class:`bayesbinom.mcmc.ReturnSeries` directly:
  :py:class:`baselines.SampleMeans`, :py:class:`baselines.BootstrappedMeans` and
  :py:class:`baselines.BootstrappedValues`.

Every method class stores its settings, and :py:func:`propagate` is dispatched on the
method and the type of its source:

.. code-block:: python

    dist = propagate(XiMethod(draws=5000, bins=100), chain, frame, key)
    summary = analyze(dist)

The per-sample work of each method is compiled with :py:mod:`jax` and split into tasks
that own independent random streams (see :py:class:`utils.TaskConfig`). Results are
merged in sample order, so any executor produces the same output.

Each method is also available as a plain function (:py:func:`theta.theta_method`,
:py:func:`xi.xi_method` and so on) for finer control.
"""

from .baselines import (
    BootstrapConfig,
    BootstrappedMeans,
    BootstrappedValues,
    SampleMeans,
    bootstrapped_means,
    bootstrapped_values,
    sample_means_calibration,
)
from .core import (
    METHOD_TAGS,
    PriceDistribution,
    PropagationMethod,
    analyze,
    price_distribution,
    propagate,
    summarize,
)
from .expected_xi import ExpectedXiMethod, expected_xi, expected_xi_method
from .theta import ThetaMethod, theta_method
from .utils import SerialExecutor, TaskConfig, run_tasks
from .xi import XiGrid, XiMethod, build_xi_grid, draw_xi, grid_expectation, xi_method

METHODS = {
    cls.tag: cls
    for cls in (
        ThetaMethod,
        XiMethod,
        ExpectedXiMethod,
        SampleMeans,
        BootstrappedMeans,
        BootstrappedValues,
    )
}

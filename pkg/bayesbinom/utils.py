# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

from typing import Union

import jax
import numpy
from jax import numpy as np
from plum import Dispatcher

# BayesBinom main dispatcher
dispatch = Dispatcher()


JaxArray = jax.Array
Bool = Union[JaxArray, bool]
Float = Union[JaxArray, float]
Int = Union[JaxArray, int]
Scalar = Union[None, bool, int, float]


class DegenerateWindowError(ValueError):
    """
    Raised when a window of returns has no up moves or no down moves, so that
    one of the two tree branches cannot be calibrated.
    """


class NumericalError(ArithmeticError):
    """
    Raised when a quantity cannot be evaluated in floating point, for instance
    when the mass of a truncated normal vanishes on its support.
    """


def rng_key(seed=0):
    """
    Returns the root `jax.random` key for an integer seed.
    """
    return jax.random.PRNGKey(int(seed))


def task_key(key, index):
    """
    Returns the independent stream owned by task `index` of the stream `key`.
    Streams depend only on the index, never on how tasks are scheduled.
    """
    return jax.random.fold_in(key, index)


def shifted_mean(x, axis=None):
    """
    Mean of `x` computed around its first element. For constant inputs the result
    is exactly that constant, which plain `mean` does not guarantee.
    """
    x = np.asarray(x)
    pivot = np.take(x, 0, axis=axis) if axis is not None else x.ravel()[0]
    if axis is not None:
        pivot = np.expand_dims(pivot, axis)
        return np.squeeze(pivot, axis) + np.mean(x - pivot, axis=axis)
    return pivot + np.mean(x - pivot)


def numpyfy(tree):
    """
    Converts every array leaf of a pytree into a host `numpy.ndarray`.
    """
    return jax.tree_util.tree_map(numpy.asarray, tree)


def check_finite(value, name):
    """
    Raises `ValueError` if the concrete scalar `value` is not finite.
    """
    if not numpy.all(numpy.isfinite(numpy.asarray(value))):
        raise ValueError(f"`{name}` must be finite (got {value})")

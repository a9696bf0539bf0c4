# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Task splitting helpers shared by the propagation methods.
"""

from concurrent.futures import Executor, Future

import numpy
from jax import numpy as np
from jax import random, vmap


class SerialExecutor(Executor):
    """
    Subclass of `concurrent.futures.Executor` used as the default
    task manager. It will execute all tasks in serial.
    """

    def submit(self, fn, *args, **kwargs):  # pylint: disable=arguments-differ
        """
        Executes `fn(*args, **kwargs)` and returns a `Future` object wrapping the result.
        """
        future = Future()
        future.set_result(fn(*args, **kwargs))
        return future


class TaskConfig:
    """
    Stores how Monte Carlo work is split into tasks and where the tasks run.
    """

    def __init__(self, chunk_size: int = 1000, executor=SerialExecutor()):
        """
        TaskConfig constructor.

        Parameters
        ----------
        chunk_size: int
            Number of consecutive samples evaluated by each task.
            Defaults to `1000`.

        executor:
            Task manager that satisfies the `concurrent.futures.Executor` interface.
            Defaults to `SerialExecutor()`.
        """
        if int(chunk_size) < 1:
            raise ValueError(f"chunk_size must be positive (got {chunk_size})")
        self.chunk_size = int(chunk_size)
        self.executor = executor


def sample_keys(key, indices):
    """
    Returns the stream of each sample index, `fold_in(key, index)`.
    """
    return vmap(random.fold_in, in_axes=(None, 0))(key, indices)


def run_tasks(fn, count: int, config: TaskConfig = TaskConfig()):
    """
    Evaluates `fn(indices)` over the sample indices `0, ..., count - 1`.

    Indices are split in chunks of `config.chunk_size`, padded to full length so that
    every task runs the same compiled program, and submitted to `config.executor`.
    `fn` must return arrays whose leading axis follows `indices`. Results are
    concatenated in index order, so they do not depend on the executor.
    """
    count = int(count)
    if count < 1:
        raise ValueError(f"The number of samples must be positive (got {count})")
    chunk = config.chunk_size

    def task(start):
        stop = min(start + chunk, count)
        out = fn(np.arange(start, start + chunk))
        return [numpy.asarray(x)[: stop - start] for x in _as_tuple(out)]

    futures = [config.executor.submit(task, start) for start in range(0, count, chunk)]
    parts = [future.result() for future in futures]
    results = tuple(numpy.concatenate(column) for column in zip(*parts))
    return results if len(results) > 1 else results[0]


def _as_tuple(out):
    return tuple(out) if isinstance(out, (tuple, list)) else (out,)

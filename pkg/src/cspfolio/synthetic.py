"""Synthetic scenarios for tests, demos and benchmarks."""

from __future__ import annotations

import numpy as np

from .scenario import Scenario, Status


def random_scenario(seed: int, n_instances: int = 40, n_solvers: int = 5, n_features: int = 4,
                    timeout: float = 1800.0, p_error: float = 0.05, p_hard: float = 0.15) -> Scenario:
    """Runtimes loosely driven by the features, with timeouts, errors and unsolvable instances."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n_instances, n_features))
    W = rng.normal(size=(n_features, n_solvers))
    bias = rng.normal(np.log(timeout) - 2.5, 1.0, size=n_solvers)
    log_t = bias[None, :] + X @ W * 0.8 + rng.normal(scale=1.0, size=(n_instances, n_solvers))
    times = np.round(np.exp(log_t), 3)
    hard = rng.random(n_instances) < p_hard
    times[hard] = np.inf
    status = np.where(times <= timeout, Status.SOLVED, Status.TIMEOUT).astype(np.int8)
    times = np.where(status == Status.SOLVED, times, timeout)
    err = rng.random((n_instances, n_solvers)) < p_error
    status[err] = Status.ERROR
    times[err] = np.round(rng.uniform(0, timeout, size=int(err.sum())), 3)
    return Scenario(
        solvers=tuple(f"s{j}" for j in range(n_solvers)),
        instances=tuple(f"i{i:04d}" for i in range(n_instances)),
        status=status,
        times=times,
        features=np.round(X, 6),
        feature_cost=np.round(rng.uniform(0, 3, size=n_instances), 3),
        timeout=timeout,
    )


def planted_scenario(seed: int = 42, per_cluster: int = 40, n_features: int = 4, separation: float = 10.0,
                     timeout: float = 300.0) -> Scenario:
    """Three feature clusters, each owned by one solver that is 10x faster there than the others.

    The owner solves its cluster in 5-40 seconds; the other two need ten
    times as long and therefore time out on part of the cluster.
    """
    rng = np.random.default_rng(seed)
    n_solvers = 3
    centers = np.zeros((n_solvers, n_features))
    for c in range(n_solvers):
        centers[c, c % n_features] = separation
    cluster = np.repeat(np.arange(n_solvers), per_cluster)
    X = centers[cluster] + rng.normal(size=(cluster.size, n_features))
    own = np.round(rng.uniform(5, 40, size=cluster.size), 3)
    times = np.empty((cluster.size, n_solvers))
    for v in range(n_solvers):
        times[:, v] = np.where(cluster == v, own, own * 10)
    status = np.where(times <= timeout, Status.SOLVED, Status.TIMEOUT).astype(np.int8)
    times = np.where(status == Status.SOLVED, times, timeout)
    return Scenario(
        solvers=("alpha", "beta", "gamma"),
        instances=tuple(f"p{i:04d}" for i in range(cluster.size)),
        status=status,
        times=times,
        features=np.round(X, 6),
        feature_cost=np.round(rng.uniform(0, 1, size=cluster.size), 3),
        timeout=timeout,
    )

from __future__ import annotations

import numpy as np

from cspfolio.scenario import Scenario, Status


def make_scenario(times, status=None, timeout=10.0, features=None, costs=None, solvers=None):
    """Scenario from a dense time matrix; ``inf`` entries become timeouts."""
    times = np.asarray(times, dtype=float)
    n, s = times.shape
    if status is None:
        status = np.where(times <= timeout, Status.SOLVED, Status.TIMEOUT)
    status = np.asarray(status, dtype=np.int8)
    times = np.where(status == Status.TIMEOUT, timeout, times)
    if features is None:
        features = np.arange(n, dtype=float).reshape(n, 1)
    if costs is None:
        costs = np.zeros(n)
    return Scenario(
        solvers=tuple(solvers or (chr(ord("A") + j) for j in range(s))),
        instances=tuple(f"i{i:03d}" for i in range(n)),
        status=status,
        times=times,
        features=features,
        feature_cost=costs,
        timeout=timeout,
    )


def replay(s, instance, decision, backup, features=True):
    """Plain interpreter for a decision, written without the package's clock.

    Returns ``(solved, elapsed, steps)`` where steps are
    ``(solver, start, used, result)`` tuples.
    """
    from cspfolio.evaluation.simulate import Single

    i = s.instances.index(instance)
    T = float(s.timeout)
    now = float(s.feature_cost[i]) if features else 0.0
    steps = []
    if now >= T:
        return False, T, steps

    def attempt(v, budget):
        nonlocal now
        j = s.solvers.index(v)
        st, t = int(s.status[i, j]), float(s.times[i, j])
        if st == Status.SOLVED and t <= budget:
            res, used = "solved", t
        elif st == Status.ERROR and t <= budget:
            res, used = "error", t
        else:
            res, used = "timeout", budget
        steps.append((v, now, used, res))
        now += used
        return res

    def final(v):
        res = attempt(v, T - now)
        if res == "error" and T - now > 0:
            res = attempt(backup, T - now)
        return res == "solved"

    if isinstance(decision, Single):
        if decision.solver is None:
            ok = attempt(backup, T - now) == "solved"
        else:
            ok = final(decision.solver)
        return ok, min(now, T), steps
    for v, d in decision.schedule.slots:
        if now >= T:
            return False, min(now, T), steps
        if attempt(v, min(float(d), T - now)) == "solved":
            return True, min(now, T), steps
    if now >= T:
        return False, min(now, T), steps
    return final(decision.long_runner or backup), min(now, T), steps

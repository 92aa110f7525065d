"""Replay of a solving strategy against the recorded runs of one instance.

Solvers are deterministic: a run of solver ``v`` allotted ``a`` seconds
solves iff the recorded status is solved with time <= ``a``, fails at the
recorded time iff the recorded status is error with time <= ``a``, and
otherwise uses the whole allotment. Repeated runs start over.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from ..scenario import Portfolio, Scenario, Status
from ..scheduling import Schedule

__all__ = ["Single", "Scheduled", "Decision", "Step", "SimOutcome", "simulate"]


@dataclass(frozen=True)
class Single:
    """Run one solver for the whole remaining time; ``None`` means no solver was predicted."""

    solver: Optional[str]


@dataclass(frozen=True)
class Scheduled:
    schedule: Schedule
    long_runner: Optional[str] = None


Decision = Union[Single, Scheduled]


@dataclass(frozen=True)
class Step:
    solver: str
    start: float
    duration: float
    result: str  # "solved" | "timeout" | "error"


@dataclass(frozen=True)
class SimOutcome:
    solved: bool
    elapsed: float
    steps: tuple[Step, ...]


class _Clock:
    def __init__(self, s: Scenario, row: int, start: float):
        self.s = s
        self.row = row
        self.now = start
        self.steps: list[Step] = []

    @property
    def remaining(self) -> float:
        return max(0.0, self.s.timeout - self.now)

    def run(self, solver: str, allotted: float) -> str:
        j = self.s.solver_index(solver)
        status = Status(int(self.s.status[self.row, j]))
        t = float(self.s.times[self.row, j])
        if status is Status.SOLVED and t <= allotted:
            result, used = "solved", t
        elif status is Status.ERROR and t <= allotted:
            result, used = "error", t
        else:
            result, used = "timeout", allotted
        self.steps.append(Step(solver, self.now, used, result))
        self.now += used
        return result


def simulate(d: Decision, instance: str, s: Scenario, p: Portfolio, include_features: bool = True) -> SimOutcome:
    """Simulate decision ``d`` on ``instance``; the clock starts at the feature cost."""
    row = s.instance_index(instance)
    for v in _solvers_of(d, p):
        s.solver_index(v)
    start = float(s.feature_cost[row]) if include_features else 0.0
    if start >= s.timeout:
        return SimOutcome(False, float(s.timeout), ())
    clock = _Clock(s, row, start)
    solved = _execute(d, clock, p)
    return SimOutcome(solved, min(clock.now, float(s.timeout)), tuple(clock.steps))


def _solvers_of(d: Decision, p: Portfolio):
    yield p.backup
    if isinstance(d, Single):
        if d.solver is not None:
            yield d.solver
    else:
        yield from d.schedule.solvers()
        if d.long_runner is not None:
            yield d.long_runner


def _run_with_backup(clock: _Clock, solver: str, backup: str) -> bool:
    result = clock.run(solver, clock.remaining)
    if result == "error" and clock.remaining > 0:
        result = clock.run(backup, clock.remaining)
    return result == "solved"


def _execute(d: Decision, clock: _Clock, p: Portfolio) -> bool:
    if isinstance(d, Single):
        if d.solver is None:
            return clock.run(p.backup, clock.remaining) == "solved"
        return _run_with_backup(clock, d.solver, p.backup)
    for solver, seconds in d.schedule.slots:
        if clock.remaining <= 0:
            return False
        if clock.run(solver, min(float(seconds), clock.remaining)) == "solved":
            return True
    if clock.remaining <= 0:
        return False
    return _run_with_backup(clock, d.long_runner or p.backup, p.backup)

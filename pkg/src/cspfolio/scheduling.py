"""Solver schedules: per-instance neighbor schedules and offline static pre-schedules.

Both schedulers solve the same coverage problem: give every portfolio
member an integer number of seconds, within a budget, so that as many
reference instances as possible are solved by at least one member within
its slot. A slot of ``d`` seconds solves an instance iff ``d >= 1`` and the
recorded solving time is at most ``d``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.preprocessing import StandardScaler
from sklearn.utils.validation import check_array

from .scenario import Portfolio, Scenario, ScenarioError

__all__ = [
    "Schedule",
    "CoverageProblem",
    "NeighborIndex",
    "optimal_allocation",
    "greedy_allocation",
    "allocation_to_schedule",
    "cphydra_schedule",
    "s3_build_static",
    "s3_long_runner",
    "write_schedule",
    "read_schedule",
    "EXACT_MEMBER_LIMIT",
]

EXACT_MEMBER_LIMIT = 8


@dataclass(frozen=True)
class Schedule:
    slots: tuple[tuple[str, int], ...]

    def __post_init__(self):
        raw_slots = tuple(self.slots)
        slots = tuple((str(v), int(d)) for v, d in raw_slots)
        object.__setattr__(self, "slots", slots)
        for (v, d), (_, raw) in zip(slots, raw_slots):
            if d <= 0 or d != raw:
                raise ScenarioError(f"slot for {v} must be a positive integer, got {raw}")
        names = [v for v, _ in slots]
        if len(set(names)) != len(names):
            raise ScenarioError("a solver appears in two slots")

    @property
    def total(self) -> int:
        return sum(d for _, d in self.slots)

    def __len__(self) -> int:
        return len(self.slots)

    def solvers(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.slots)


@dataclass(frozen=True)
class CoverageProblem:
    """``solve_time[n, v]``: time member ``v`` needs on reference instance ``n``, ``inf`` if never."""

    members: tuple[str, ...]
    solve_time: np.ndarray
    budget: int

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        t = np.asarray(self.solve_time, dtype=float).reshape(-1, len(self.members))
        object.__setattr__(self, "solve_time", t)
        if int(self.budget) != self.budget or self.budget < 0:
            raise ScenarioError("budget must be a non-negative integer")
        object.__setattr__(self, "budget", int(self.budget))

    @property
    def n_members(self) -> int:
        return len(self.members)

    def required(self) -> np.ndarray:
        """Smallest slot solving each (instance, member) pair; ``inf`` when unreachable."""
        need = np.maximum(1.0, np.ceil(self.solve_time))
        return np.where(np.isfinite(self.solve_time), need, np.inf)

    def coverage(self, durations: Sequence[int]) -> int:
        d = np.asarray(durations, dtype=float)
        hit = (self.required() <= d[None, :]) & (d[None, :] >= 1)
        return int(hit.any(axis=1).sum())


def _member_tables(problem: CoverageProblem):
    """Per member: ascending useful slot lengths and the instance bitmask each one covers."""
    need = problem.required()
    tables = []
    for v in range(problem.n_members):
        col = need[:, v]
        values = sorted({int(x) for x in col if x <= problem.budget})
        masks = []
        acc = 0
        for c in values:
            for n in np.flatnonzero(col == c):
                acc |= 1 << int(n)
            masks.append(acc)
        tables.append((values, masks))
    return tables


def _reach(values, masks, budget: int) -> int:
    k = np.searchsorted(values, budget, side="right")
    return masks[k - 1] if k else 0


def optimal_allocation(problem: CoverageProblem) -> tuple[int, tuple[int, ...]]:
    """Exact optimum by depth-first branch and bound.

    Maximizes coverage, then minimizes the total allotted time, then picks
    the lexicographically smallest duration vector in member order. Only
    slot lengths that solve some instance exactly on time are branched on,
    which loses nothing once totals are minimized.
    """
    tables = _member_tables(problem)
    p = problem.n_members
    best = [-1, math.inf, None]
    durations = [0] * p

    def bound(v: int, rem: int, covered: int) -> int:
        for u in range(v, p):
            covered |= _reach(*tables[u], rem)
        return covered.bit_count()

    def dfs(v: int, rem: int, covered: int, total: int) -> None:
        if v == p:
            cov = covered.bit_count()
            if cov > best[0] or (cov == best[0] and total < best[1]):
                best[0], best[1], best[2] = cov, total, tuple(durations)
            return
        ub = bound(v, rem, covered)
        if ub < best[0] or (ub == best[0] and total >= best[1]):
            return
        durations[v] = 0
        dfs(v + 1, rem, covered, total)
        values, masks = tables[v]
        gained_before = covered
        for c, mask in zip(values, masks):
            if c > rem:
                break
            now = covered | mask
            # same coverage as a shorter slot of this member: dominated
            if now == gained_before:
                continue
            gained_before = now
            durations[v] = c
            dfs(v + 1, rem - c, now, total + c)
        durations[v] = 0

    dfs(0, problem.budget, 0, 0)
    return best[0], best[2]


def greedy_allocation(problem: CoverageProblem) -> tuple[int, tuple[int, ...]]:
    """Marginal-coverage greedy in whole seconds for large portfolios.

    Each step extends one member's slot to the length with the best ratio of
    newly covered instances per added second (ties: fewer added seconds,
    then member order) until nothing more fits or helps.
    """
    tables = _member_tables(problem)
    p = problem.n_members
    durations = [0] * p
    covered, rem = 0, problem.budget
    while True:
        best = None
        for v in range(p):
            values, masks = tables[v]
            for c, mask in zip(values, masks):
                extra = c - durations[v]
                if extra <= 0 or extra > rem:
                    continue
                gain = (covered | mask).bit_count() - covered.bit_count()
                if gain == 0:
                    continue
                key = (-gain / extra, extra, v)
                if best is None or key < best[0]:
                    best = (key, v, c, mask)
        if best is None:
            break
        _, v, c, mask = best
        rem -= c - durations[v]
        durations[v] = c
        covered |= mask
    return covered.bit_count(), tuple(durations)


def allocation_to_schedule(members: Sequence[str], durations: Sequence[int]) -> Schedule:
    """Non-zero slots in ascending duration, ties in member order."""
    slots = [(members[v], int(d)) for v, d in enumerate(durations) if d > 0]
    order = sorted(range(len(slots)), key=lambda k: (slots[k][1], k))
    return Schedule(tuple(slots[k] for k in order))


class NeighborIndex:
    """Training instances of one fold, searchable in z-score feature space.

    Stores, per training instance, each portfolio member's solve time
    (``inf`` when unsolved) and capped time.
    """

    def __init__(self, members: Sequence[str] = (), timeout: float = 1800.0):
        self.members = tuple(members)
        self.timeout = timeout

    def fit(self, X, runtimes, solved):
        X = check_array(X, dtype=float)
        runtimes = np.asarray(runtimes, dtype=float)
        solved = np.asarray(solved, dtype=bool)
        self.normalizer_ = StandardScaler().fit(X)
        self.train_ = self.normalizer_.transform(X)
        self.solve_time_ = np.where(solved, runtimes, np.inf)
        self.capped_ = np.where(solved, np.minimum(runtimes, self.timeout), self.timeout)
        self.solved_ = solved
        return self

    @classmethod
    def from_scenario(cls, s: Scenario, p: Portfolio) -> "NeighborIndex":
        cols = p.columns(s)
        return cls(p.members, s.timeout).fit(s.features, s.times[:, cols], s.solved[:, cols])

    def kneighbors(self, features, k: int) -> np.ndarray:
        if not hasattr(self, "train_"):
            raise ScenarioError("neighbor index is not fitted")
        if k < 1:
            raise ScenarioError("k must be at least 1")
        n = self.train_.shape[0]
        if k > n:
            warnings.warn(f"k={k} exceeds training size {n}; clamped", stacklevel=2)
            k = n
        z = self.normalizer_.transform(np.asarray(features, dtype=float).reshape(1, -1))[0]
        d = np.sqrt(((self.train_ - z) ** 2).sum(axis=1))
        return np.argsort(d, kind="stable")[:k]


def _check_members(p: Portfolio, index: NeighborIndex | None = None) -> None:
    if not p.members:
        raise ScenarioError("empty portfolio")
    if index is not None and tuple(index.members) != tuple(p.members):
        raise ScenarioError("neighbor index was built for a different portfolio")


def cphydra_schedule(index: NeighborIndex, features, k: int, p: Portfolio, timeout: float) -> Schedule:
    """Schedule covering as many of the ``k`` nearest training instances as possible.

    Leftover seconds go to the longest slot (ties in portfolio order); when
    no neighbor can be covered the backup gets the whole timeout.
    """
    _check_members(p, index)
    budget = int(math.floor(timeout))
    nbrs = index.kneighbors(features, k)
    problem = CoverageProblem(p.members, index.solve_time_[nbrs], budget)
    cov, durations = optimal_allocation(problem)
    if cov == 0:
        return Schedule(((p.backup, budget),))
    durations = list(durations)
    longest = max(range(len(durations)), key=lambda v: (durations[v], -v))
    durations[longest] += budget - sum(durations)
    return allocation_to_schedule(p.members, durations)


def s3_build_static(training: Scenario, p: Portfolio, budget: int) -> Schedule:
    """Offline pre-schedule maximizing solved training instances within ``budget`` seconds."""
    _check_members(p)
    if budget < 1:
        raise ScenarioError("static schedule budget must be at least 1 second")
    cols = p.columns(training)
    solve_time = np.where(training.solved[:, cols], training.times[:, cols], np.inf)
    problem = CoverageProblem(p.members, solve_time, int(budget))
    if len(p.members) <= EXACT_MEMBER_LIMIT:
        _, durations = optimal_allocation(problem)
    else:
        _, durations = greedy_allocation(problem)
    return allocation_to_schedule(p.members, durations)


def s3_long_runner(index: NeighborIndex, features, k: int, p: Portfolio) -> str:
    """Member solving most of the ``k`` nearest training instances; ties by mean capped time, then rank."""
    _check_members(p, index)
    nbrs = index.kneighbors(features, k)
    n_solved = index.solved_[nbrs].sum(axis=0)
    mean_t = index.capped_[nbrs].mean(axis=0)
    v = min(range(len(p.members)), key=lambda j: (-int(n_solved[j]), float(mean_t[j]), j))
    return p.members[v]


def write_schedule(schedule: Schedule, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "solver", "seconds"])
        for r, (v, d) in enumerate(schedule.slots, start=1):
            w.writerow([r, v, d])


def read_schedule(path: str | Path) -> Schedule:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["rank", "solver", "seconds"]:
        raise ScenarioError(f"{path}: expected header rank,solver,seconds")
    body = sorted((int(r[0]), r[1], int(r[2])) for r in rows[1:] if r)
    return Schedule(tuple((v, d) for _, v, d in body))

"""Portfolio construction by swap local search, with an exhaustive oracle."""

from __future__ import annotations

import csv
import itertools
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .evaluation.voting import default_backup, elect_backup
from .scenario import Portfolio, Scenario, ScenarioError

__all__ = [
    "PortfolioObjective",
    "objective",
    "build_portfolio",
    "enumerate_portfolio",
    "order_members",
    "write_portfolio",
    "read_portfolio",
    "ENUMERATION_LIMIT",
]

ENUMERATION_LIMIT = 10**6


@dataclass(frozen=True, order=True)
class PortfolioObjective:
    solved: int
    ast: float

    def key(self) -> tuple[int, float]:
        # smaller is better
        return (-self.solved, self.ast)


def _objective_cols(solved: np.ndarray, capped: np.ndarray, cols: Sequence[int]) -> PortfolioObjective:
    cols = list(cols)
    n_solved = int(solved[:, cols].any(axis=1).sum())
    ast = float(capped[:, cols].min(axis=1).mean()) if capped.shape[0] else 0.0
    return PortfolioObjective(n_solved, ast)


def objective(s: Scenario, members: Sequence[str]) -> PortfolioObjective:
    """Instances solved by at least one member, and the oracle's mean capped time."""
    return _objective_cols(s.solved, s.capped, [s.solver_index(v) for v in members])


def order_members(s: Scenario, members: Sequence[str]) -> tuple[str, ...]:
    """Descending individual solved count, then ascending capped mean time, then index."""
    solved = s.solved.sum(axis=0)
    ast = s.capped.mean(axis=0) if s.n_instances else np.zeros(s.n_solvers)
    cols = sorted((s.solver_index(v) for v in members), key=lambda j: (-int(solved[j]), float(ast[j]), j))
    return tuple(s.solvers[j] for j in cols)


def _backup(s: Scenario, members: Sequence[str], rule: str) -> str:
    electorate = s.restrict(list(members))
    if rule == "condorcet":
        return default_backup(electorate)
    return elect_backup(electorate, rule)


def _check_size(s: Scenario, n: int) -> None:
    if not 1 <= n <= s.n_solvers:
        raise ScenarioError(f"portfolio size {n} outside [1, {s.n_solvers}]")


def _local_search(solved, capped, start: list[int], n_solvers: int):
    current = sorted(start)
    cur_key = _objective_cols(solved, capped, current).key()
    while True:
        best = None
        for out in current:
            for inn in range(n_solvers):
                if inn in current:
                    continue
                cand = sorted([c for c in current if c != out] + [inn])
                key = _objective_cols(solved, capped, cand).key()
                if best is None or (key, cand) < best[:2]:
                    best = (key, cand)
        if best is None or not best[0] < cur_key:
            return cur_key, current
        cur_key, current = best


def _greedy_start(solved, capped, n: int, n_solvers: int) -> list[int]:
    chosen: list[int] = []
    for _ in range(n):
        rest = [j for j in range(n_solvers) if j not in chosen]
        chosen.append(min(rest, key=lambda j: (_objective_cols(solved, capped, chosen + [j]).key(), j)))
    return chosen


def build_portfolio(
    s: Scenario,
    n: int,
    seed: int = 0,
    restarts: int = 10,
    backup_rule: str = "plurality",
) -> Portfolio:
    """Size-``n`` portfolio maximizing solved instances, ties by lower oracle time.

    Steepest-ascent single-swap search from a greedy start, followed by
    ``restarts - 1`` searches from seeded random subsets. The best result
    wins; equal objectives keep the earliest restart.
    """
    _check_size(s, n)
    solved, capped = s.solved, s.capped
    rng = random.Random(seed)
    best = None
    for r in range(max(1, restarts)):
        if r == 0:
            start = _greedy_start(solved, capped, n, s.n_solvers)
        else:
            start = rng.sample(range(s.n_solvers), n)
        key, cols = _local_search(solved, capped, start, s.n_solvers)
        if best is None or key < best[0]:
            best = (key, cols)
    members = order_members(s, [s.solvers[j] for j in best[1]])
    return Portfolio(members, _backup(s, members, backup_rule))


def enumerate_portfolio(s: Scenario, n: int, backup_rule: str = "plurality") -> Portfolio:
    """Global optimum over all size-``n`` subsets.

    Ties go to the subset whose sorted solver-index tuple is smallest.
    """
    _check_size(s, n)
    if math.comb(s.n_solvers, n) > ENUMERATION_LIMIT:
        raise ScenarioError(f"C({s.n_solvers}, {n}) exceeds enumeration limit {ENUMERATION_LIMIT}")
    solved, capped = s.solved, s.capped
    best = min(
        ((_objective_cols(solved, capped, cols).key(), cols) for cols in itertools.combinations(range(s.n_solvers), n)),
    )
    members = order_members(s, [s.solvers[j] for j in best[1]])
    return Portfolio(members, _backup(s, members, backup_rule))


def write_portfolio(p: Portfolio, path: str | Path) -> None:
    """Rank 0 holds the backup solver, ranks 1..n the members in order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "solver"])
        w.writerow([0, p.backup])
        for k, v in enumerate(p.members, start=1):
            w.writerow([k, v])


def read_portfolio(path: str | Path) -> Portfolio:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["rank", "solver"]:
        raise ScenarioError(f"{path}: expected header rank,solver")
    ranked = sorted((int(r[0]), r[1]) for r in rows[1:] if r)
    backup = next((v for k, v in ranked if k == 0), None)
    members = tuple(v for k, v in ranked if k > 0)
    if backup is None:
        backup = members[0]
    return Portfolio(members, backup)

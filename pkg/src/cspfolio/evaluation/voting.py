"""Backup-solver elections: instances vote over solvers by solving time."""

from __future__ import annotations

import numpy as np

from ..scenario import Scenario, ScenarioError

__all__ = ["RULES", "tally", "elect_backup", "condorcet_winner", "default_backup"]

RULES = ("plurality", "approval", "borda")


def _solved_times(s: Scenario) -> np.ndarray:
    return np.where(s.solved, s.times, np.inf)


def tally(s: Scenario, rule: str) -> np.ndarray:
    """Per-solver score under a positional rule.

    plurality: one vote for the fastest solver(s) of each instance, exact
    ties voting for every tied solver. approval: a vote for every solver
    that solves the instance. borda: among the solving solvers ranked by
    time (tied times share the better rank), rank r earns n_solvers - r
    points with r starting at 1; non-solvers earn nothing.
    """
    t = _solved_times(s)
    if rule == "plurality":
        best = t.min(axis=1, keepdims=True) if s.n_instances else t
        return (s.solved & (t == best)).sum(axis=0).astype(float)
    if rule == "approval":
        return s.solved.sum(axis=0).astype(float)
    if rule == "borda":
        scores = np.zeros(s.n_solvers)
        for row, ok in zip(t, s.solved):
            for j in np.flatnonzero(ok):
                rank = 1 + int(np.sum(row < row[j]))
                scores[j] += s.n_solvers - rank
        return scores
    raise ScenarioError(f"unknown voting rule {rule!r}")


def elect_backup(s: Scenario, rule: str = "plurality") -> str:
    if s.n_solvers == 0:
        raise ScenarioError("no candidates")
    scores = tally(s, rule)
    # argmax returns the first maximum: lowest index wins ties
    return s.solvers[int(np.argmax(scores))]


def condorcet_winner(s: Scenario) -> str | None:
    """Solver preferred over every other one by a strict majority of non-abstaining instances.

    An instance prefers the solver with strictly smaller solving time, where
    solving beats not solving; equal times (including both unsolved) abstain.
    """
    t = _solved_times(s)
    for v in range(s.n_solvers):
        wins = True
        for u in range(s.n_solvers):
            if u == v:
                continue
            pro = int(np.sum(t[:, v] < t[:, u]))
            con = int(np.sum(t[:, u] < t[:, v]))
            if not pro > con:
                wins = False
                break
        if wins:
            return s.solvers[v]
    return None


def default_backup(s: Scenario) -> str:
    """Condorcet winner when one exists, else the plurality winner."""
    return condorcet_winner(s) or elect_backup(s, "plurality")

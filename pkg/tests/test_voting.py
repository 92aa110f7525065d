from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cspfolio.evaluation.voting import condorcet_winner, default_backup, elect_backup, tally
from cspfolio.scenario import ScenarioError, fastest_counts
from cspfolio.synthetic import random_scenario

from helpers import make_scenario


def brute_scores(s, rule):
    scores = dict.fromkeys(s.solvers, 0)
    for i in range(s.n_instances):
        times = {v: s.times[i, j] for j, v in enumerate(s.solvers) if s.solved[i, j]}
        if not times:
            continue
        best = min(times.values())
        for v, t in times.items():
            if rule == "plurality":
                scores[v] += t == best
            elif rule == "approval":
                scores[v] += 1
            else:
                rank = 1 + sum(u < t for u in times.values())
                scores[v] += s.n_solvers - rank
    return scores


def brute_condorcet(s):
    t = np.where(s.solved, s.times, np.inf)
    for v in range(s.n_solvers):
        if all(
            sum(t[i, v] < t[i, u] for i in range(s.n_instances)) > sum(t[i, u] < t[i, v] for i in range(s.n_instances))
            for u in range(s.n_solvers)
            if u != v
        ):
            return s.solvers[v]
    return None


def test_unanimity():
    s = make_scenario([[1, 2, 3], [1, 5, 4], [2, 9, 9]])
    for rule in ("plurality", "approval", "borda"):
        assert elect_backup(s, rule) == "A"
    assert condorcet_winner(s) == "A"


def test_plurality_and_borda_disagree():
    # A wins two instances outright, B is second everywhere and wins one
    times = [[1, 2, 9], [1, 2, 9], [9, 1, 2], [9, 2, 1], [9, 2, 1]]
    s = make_scenario(times, timeout=20)
    assert brute_scores(s, "plurality") == {"A": 2, "B": 1, "C": 2}
    assert elect_backup(s, "plurality") == "A"
    assert brute_scores(s, "borda") == {"A": 4, "B": 6, "C": 5}
    assert elect_backup(s, "borda") == "B"


def test_unsolved_instances_abstain():
    s = make_scenario([[1, 2], [np.inf, np.inf]])
    assert tally(s, "approval").tolist() == [1, 1]
    assert tally(s, "borda").tolist() == [1, 0]


def test_condorcet_cycle():
    times = [[1, 2, 3], [3, 1, 2], [2, 3, 1]]
    assert condorcet_winner(make_scenario(times)) is None
    assert default_backup(make_scenario(times)) == "A"


def test_dominant_solver_wins_everything():
    s = make_scenario([[1, 4, 5], [2, np.inf, 3], [1, 1.5, np.inf]])
    assert {elect_backup(s, r) for r in ("plurality", "approval", "borda")} == {"A"}
    assert default_backup(s) == "A"


def test_single_candidate():
    s = make_scenario([[np.inf], [np.inf]])
    assert elect_backup(s, "borda") == "A"
    assert condorcet_winner(s) == "A"


def test_unknown_rule():
    with pytest.raises(ScenarioError):
        tally(make_scenario([[1]]), "range")


@given(seed=st.integers(0, 10**5))
@settings(max_examples=30, deadline=None)
def test_tallies_against_brute_force(seed):
    s = random_scenario(seed=seed, n_instances=15, n_solvers=4)
    for rule in ("plurality", "approval", "borda"):
        assert tally(s, rule).tolist() == [brute_scores(s, rule)[v] for v in s.solvers]
    assert condorcet_winner(s) == brute_condorcet(s)
    counts = fastest_counts(s)
    assert elect_backup(s, "plurality") == max(s.solvers, key=lambda v: (counts[v], -s.solvers.index(v)))

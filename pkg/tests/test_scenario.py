from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cspfolio.scenario import (
    Portfolio,
    ScenarioError,
    ScenarioParseError,
    Status,
    fastest_counts,
    filter_presolved,
    load_scenario,
    marginal_contribution,
    parse_scenario,
    single_best,
    virtual_best,
    write_scenario,
)
from cspfolio.synthetic import random_scenario

from helpers import make_scenario


# -- parsing -----------------------------------------------------------------


def test_parse_small(texts_2x2):
    s = parse_scenario(*texts_2x2)
    assert s.solvers == ("A", "B")
    assert s.instances == ("i1", "i2")
    assert len(list(s.runs())) == 4
    assert s.timeout == 1800
    assert s.run("i1", "A") == s.run("i1", "A")
    assert s.run("i2", "A").status is Status.ERROR
    assert s.run("i2", "A").time == 3.25
    assert s.feature_record("i2").features == (-3.0, 4.25)
    assert s.feature_record("i1").feature_cost == 1.5
    assert s.solved.tolist() == [[True, False], [False, True]]


def test_row_order_irrelevant(texts_2x2):
    runs, feats, meta = texts_2x2
    head, *body = runs.strip().split("\n")
    shuffled = "\r\n".join([head, *reversed(body)]) + "\r\n"
    fhead, *fbody = feats.strip().split("\n")
    a = parse_scenario(runs, feats, meta)
    b = parse_scenario(shuffled, "\n".join([fhead, *reversed(fbody)]), meta)
    assert a.instances == b.instances and a.solvers == b.solvers
    np.testing.assert_array_equal(a.times, b.times)
    np.testing.assert_array_equal(a.status, b.status)
    np.testing.assert_array_equal(a.features, b.features)


def test_missing_cell(texts_2x2):
    runs, feats, meta = texts_2x2
    runs = "\n".join(runs.strip().split("\n")[:-1]) + "\n"
    with pytest.raises(ScenarioParseError, match="missing cell"):
        parse_scenario(runs, feats, meta)


def test_time_exceeds_timeout(texts_2x2):
    runs, feats, meta = texts_2x2
    with pytest.raises(ScenarioParseError, match="time exceeds timeout") as err:
        parse_scenario(runs.replace("i1,A,solved,10.5", "i1,A,solved,2000"), feats, meta)
    assert (err.value.file, err.value.line, err.value.column) == ("runs.csv", 2, 4)


@pytest.mark.parametrize(
    "which,old,new,match",
    [
        ("runs", "i2,B,solved,99", "i2,B,solved,99\ni2,B,solved,98", "duplicate cell"),
        ("runs", "i2,B,solved,99", "i2,B,finished,99", "unknown status"),
        ("runs", "i2,B,solved,99", "i2,B,solved,fast", "non-numeric"),
        ("runs", "i1,B,timeout,1800", "i1,B,timeout,1700", "timeout row"),
        ("features", "i2,0.5,-3,4.25", "i2,0.5,-3", "ragged"),
        ("features", "i2,0.5,-3,4.25", "i2,0.5,x,4.25", "non-numeric"),
        ("meta", "timeout_seconds,1800", "timeout_seconds,0", "timeout must be positive"),
        ("meta", "timeout_seconds,1800", "presolver,A", "timeout_seconds"),
    ],
)
def test_parse_errors(texts_2x2, which, old, new, match):
    runs, feats, meta = texts_2x2
    if which == "runs":
        runs = runs.replace(old, new)
    elif which == "features":
        feats = feats.replace(old, new)
    else:
        meta = meta.replace(old, new)
    with pytest.raises(ScenarioParseError, match=match) as err:
        parse_scenario(runs, feats, meta)
    assert err.value.line >= 1


def test_write_load_roundtrip(tmp_path):
    s = random_scenario(seed=3, n_instances=15, n_solvers=3)
    write_scenario(s, tmp_path)
    t = load_scenario(tmp_path)
    assert t.solvers == s.solvers and t.instances == s.instances
    np.testing.assert_array_equal(t.times, s.times)
    np.testing.assert_array_equal(t.status, s.status)
    np.testing.assert_array_equal(t.features, s.features)
    np.testing.assert_array_equal(t.feature_cost, s.feature_cost)


def test_scenario_is_immutable(synth20x4):
    with pytest.raises(ValueError):
        synth20x4.times[0, 0] = 1.0


# -- presolve filter ---------------------------------------------------------


def test_presolve_zero_window_keeps_positive_times():
    s = make_scenario([[0.5, 3], [2, 1], [4, 4]], timeout=10)
    assert filter_presolved(s, "A", 0).instances == s.instances


def test_presolve_zero_window_drops_zero_time():
    s = make_scenario([[0.0, 3], [2, 1]], timeout=10)
    assert filter_presolved(s, "A", 0).instances == ("i001",)


def test_presolve_total_removal():
    s = make_scenario([[0.5, 3], [2.0, 1], [1.999, 4]], timeout=10)
    assert filter_presolved(s, "A", 2).n_instances == 0


def test_presolve_linear_scan_oracle():
    s = random_scenario(seed=11, n_instances=10, n_solvers=3, timeout=20)
    expected = [
        r.instance_id
        for r in s.runs()
        if r.solver_id == "s0" and not (r.status is Status.SOLVED and r.time <= 2)
    ]
    out = filter_presolved(s, "s0", 2)
    assert list(out.instances) == expected
    assert out.solvers == s.solvers and out.timeout == s.timeout


def test_presolve_unknown_solver(synth20x4):
    with pytest.raises(ScenarioError):
        filter_presolved(synth20x4, "nope", 2)


@given(seed=st.integers(0, 10_000), window=st.floats(0, 50))
@settings(max_examples=30, deadline=None)
def test_presolve_idempotent(seed, window):
    s = random_scenario(seed=seed, n_instances=12, n_solvers=3, timeout=100)
    once = filter_presolved(s, "s1", window)
    assert filter_presolved(once, "s1", window).instances == once.instances


# -- solver statistics -------------------------------------------------------


def brute_fastest(s):
    counts = {v: 0 for v in s.solvers}
    for inst in s.instances:
        runs = [s.run(inst, v) for v in s.solvers]
        ok = [r for r in runs if r.status is Status.SOLVED and r.time <= s.timeout]
        if not ok:
            continue
        best = min(r.time for r in ok)
        for r in ok:
            if r.time == best:
                counts[r.solver_id] += 1
    return counts


def test_fastest_dominance():
    s = make_scenario([[1, np.inf, np.inf], [2, np.inf, np.inf]])
    assert fastest_counts(s) == {"A": 2, "B": 0, "C": 0}


def test_fastest_tie_credits_both():
    s = make_scenario([[3, 3, 5], [1, 2, 5]])
    assert fastest_counts(s) == {"A": 2, "B": 1, "C": 0}


def test_fastest_against_argmin_oracle(synth20x4):
    assert fastest_counts(synth20x4) == brute_fastest(synth20x4)


def brute_unique(s, v):
    n = 0
    for inst in s.instances:
        solvers = {u for u in s.solvers if s.run(inst, u).status is Status.SOLVED}
        n += solvers == {v}
    return n


def test_marginal_all_solve():
    s = make_scenario([[1, 2], [3, 4]])
    assert [marginal_contribution(s, v) for v in s.solvers] == [0, 0]


def test_marginal_unique_three():
    times = [[1, np.inf, np.inf]] * 3 + [[1, 2, 3], [np.inf, 1, np.inf], [np.inf, np.inf, np.inf]]
    s = make_scenario(times)
    assert marginal_contribution(s, "A") == 3 == brute_unique(s, "A")
    assert marginal_contribution(s, "B") == 1


def test_marginal_single_solver():
    s = make_scenario([[1], [np.inf], [4]])
    assert marginal_contribution(s, "A") == 2


def test_marginal_brute_force(synth20x4):
    for v in synth20x4.solvers:
        assert marginal_contribution(synth20x4, v) == brute_unique(synth20x4, v)


def test_single_best_levels():
    assert single_best(make_scenario([[1, 1], [1, np.inf]])) == "A"
    assert single_best(make_scenario([[5, 1], [5, 2]])) == "B"
    assert single_best(make_scenario([[2, 2], [3, 3]], solvers=("X", "W"))) == "X"


def test_virtual_best_singleton(synth20x4):
    s = synth20x4
    for j, v in enumerate(s.solvers):
        psi, ast = virtual_best(s, [v])
        assert psi == pytest.approx(s.solved[:, j].mean())
        assert ast == pytest.approx(s.capped[:, j].mean())


def test_virtual_best_min_oracle(synth20x4):
    s = synth20x4
    members = ["s0", "s2", "s3"]
    best = []
    for inst in s.instances:
        ts = [r.time if r.status is Status.SOLVED else s.timeout for r in (s.run(inst, v) for v in members)]
        best.append(min(ts))
    unsolved = sum(all(s.run(i, v).status is not Status.SOLVED for v in members) for i in s.instances)
    psi, ast = virtual_best(s, Portfolio(tuple(members), "s0"))
    assert psi == 1 - unsolved / s.n_instances
    assert ast == pytest.approx(sum(best) / len(best), rel=1e-12)


@given(seed=st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_statistics_invariants(seed):
    s = random_scenario(seed=seed, n_instances=15, n_solvers=4)
    counts = fastest_counts(s)
    solved = s.solved.sum(axis=0)
    for j, v in enumerate(s.solvers):
        assert counts[v] <= solved[j]
    assert sum(marginal_contribution(s, v) for v in s.solvers) <= s.solved.any(axis=1).sum()
    for small_n in range(1, s.n_solvers):
        for small in itertools.combinations(s.solvers, small_n):
            big = small + tuple(v for v in s.solvers if v not in small)[:1]
            ps, as_ = virtual_best(s, small)
            pb, ab = virtual_best(s, big)
            assert pb >= ps and ab <= as_ + 1e-9

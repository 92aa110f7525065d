from __future__ import annotations

import numpy as np
import pytest

from cspfolio.evaluation.cv import (
    APPROACHES,
    ApproachParams,
    cross_validate,
    evaluate_fold,
    run_sweep,
    selection_accuracy,
    significance_matrix,
)
from cspfolio.evaluation.folds import make_folds
from cspfolio.scenario import Portfolio, ScenarioError, Status, virtual_best
from cspfolio.synthetic import random_scenario

FAST = ApproachParams(trees=7, seed=3)


@pytest.fixture(scope="module")
def scen():
    return random_scenario(seed=31, n_instances=40, n_solvers=4, timeout=300)


@pytest.fixture(scope="module")
def plan(scen):
    return make_folds(scen.n_instances, repeats=2, folds=5, seed=3)


@pytest.fixture(scope="module")
def sweep(scen, plan):
    return run_sweep(scen, APPROACHES, [1, 2, 4], plan, FAST)


def test_vbs_equals_oracle(scen, plan):
    p = Portfolio(("s0", "s2", "s3"), "s2")
    res = cross_validate(scen, "vbs", p, plan, FAST)
    psi, ast = virtual_best(scen, p)
    assert res.psi == psi
    assert res.ast == pytest.approx(ast, rel=1e-12)


def test_vbs_dominates_every_fold(sweep, plan):
    for (approach, size), res in sweep.results.items():
        vbs = sweep[("vbs", size)]
        for fr, fv in zip(res.folds, vbs.folds):
            assert (fr.repeat, fr.fold) == (fv.repeat, fv.fold)
            assert fr.solved.sum() <= fv.solved.sum(), (approach, size, fr.repeat, fr.fold)


def test_psi_is_exact_fraction(sweep):
    for res in sweep.results.values():
        total = res.solved.size
        assert res.psi == 1 - (total - int(res.solved.sum())) / total
        assert np.all(res.elapsed <= sweep.scenario.timeout)


def test_sbs_matches_direct_scan(scen, plan):
    p = Portfolio(("s1", "s2", "s3"), "s1")
    res = cross_validate(scen, "sbs", p, plan, FAST)
    for fr in res.folds:
        train = plan.train_rows(fr.repeat, fr.fold)
        best = None
        for v in p.members:
            j = scen.solver_index(v)
            key = (-int(scen.solved[train, j].sum()), float(scen.capped[train, j].mean()), j)
            best = min(best or key, key)
        chosen = scen.solvers[best[2]]
        for row, ok in zip(fr.rows, fr.solved):
            j = scen.solver_index(chosen)
            start = scen.feature_cost[row]
            direct = scen.status[row, j] == Status.SOLVED and start + scen.times[row, j] <= scen.timeout
            if scen.status[row, j] == Status.ERROR:
                continue  # backup takes over
            assert ok == direct


def test_outcome_vector_length(sweep, scen, plan):
    for res in sweep.results.values():
        assert res.outcomes.shape == (plan.repeats * scen.n_instances,)


def test_unknown_approach(scen, plan):
    with pytest.raises(ScenarioError, match="unknown approach"):
        run_sweep(scen, ["magic"], [2], plan)
    with pytest.raises(ScenarioError):
        evaluate_fold(scen, "magic", Portfolio(("s0",), "s0"), plan, 0, 0, FAST)


def test_s3_static_budget(sweep):
    for (approach, _), res in sweep.results.items():
        if approach != "s3":
            continue
        for fr in res.folds:
            for sch in fr.static_schedules():
                assert sch.total <= 30
                assert all(isinstance(d, int) for _, d in sch.slots)


def test_workers_do_not_change_results(scen, plan):
    a = run_sweep(scen, ["knn", "forest", "s3"], [2], plan, FAST, workers=1)
    b = run_sweep(scen, ["knn", "forest", "s3"], [2], plan, FAST, workers=2)
    for key in a.keys():
        np.testing.assert_array_equal(a[key].solved, b[key].solved)
        np.testing.assert_array_equal(a[key].elapsed, b[key].elapsed)


def test_significance_matrix_symmetric(sweep):
    keys, m = significance_matrix(sweep, [("vbs", 4), ("sbs", 4), ("knn", 4)])
    assert m.shape == (3, 3)
    np.testing.assert_array_equal(m, m.T)
    assert np.all(np.diag(m) == 1)
    assert np.all((m >= 0) & (m <= 1))


def test_selection_accuracy_in_range(scen, plan):
    acc = selection_accuracy(scen, "knn", Portfolio(scen.solvers, "s0"), plan, FAST)
    assert 0 <= acc <= 1

"""Repeated k-fold evaluation of portfolio approaches.

Every approach is trained on the complement of a test fold and then
simulated instance by instance on the fold. Per (approach, portfolio size)
the report keeps PSI, AST, and the binary solved vector over all repeats
(repeats in order, instances in scenario order within a repeat) that the
paired t-test consumes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..scenario import Portfolio, Scenario, ScenarioError, single_best
from ..scheduling import NeighborIndex, Schedule, cphydra_schedule, s3_build_static, s3_long_runner
from ..selectors import NO_SOLVER, STRATEGIES, make_labels, make_selector
from .folds import FoldPlan
from .simulate import Decision, Scheduled, Single, simulate
from .stats import paired_t_test

__all__ = [
    "APPROACHES",
    "SELECTOR_APPROACHES",
    "ApproachParams",
    "ApproachResult",
    "FoldResult",
    "EvaluationReport",
    "fit_approach",
    "evaluate_fold",
    "cross_validate",
    "run_sweep",
    "selection_accuracy",
    "significance_matrix",
]

SELECTOR_APPROACHES = tuple(STRATEGIES)
APPROACHES = (*SELECTOR_APPROACHES, "cphydra", "s3", "sbs", "vbs")


@dataclass(frozen=True)
class ApproachParams:
    k: int = 10
    trees: int = 99
    s3_fraction: float = 0.10
    seed: int = 0
    selector_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.s3_fraction <= 1:
            raise ScenarioError("s3 fraction must lie in (0, 1]")

    def for_strategy(self, strategy: str, fold_seed: int) -> dict:
        names = STRATEGIES[strategy]._get_param_names()
        params = dict(self.selector_params.get(strategy, {}))
        if "k" in names:
            params.setdefault("k", self.k)
        if "n_trees" in names:
            params.setdefault("n_trees", self.trees)
        if "seed" in names:
            params.setdefault("seed", fold_seed)
        return params


def _training_arrays(train: Scenario, p: Portfolio):
    cols = p.columns(train)
    solved = train.solved[:, cols]
    return train.features, train.capped[:, cols], solved, make_labels(train.times[:, cols], solved)


class _SelectorApproach:
    def __init__(self, strategy: str, params: dict):
        self.strategy = strategy
        self.params = params

    def fit(self, train: Scenario, p: Portfolio):
        self.p = p
        X, runtimes, solved, y = _training_arrays(train, p)
        self.model = make_selector(self.strategy, **self.params).fit(X, y, runtimes=runtimes, solved=solved)
        return self

    def predict_labels(self, test: Scenario) -> np.ndarray:
        return self.model.predict(test.features)

    def decide(self, test: Scenario) -> list[Decision]:
        return [Single(None if lab == NO_SOLVER else self.p.members[lab]) for lab in self.predict_labels(test)]


class _CPHydraApproach:
    def __init__(self, k: int):
        self.k = k

    def fit(self, train: Scenario, p: Portfolio):
        self.p, self.timeout = p, train.timeout
        self.index = NeighborIndex.from_scenario(train, p)
        return self

    def decide(self, test: Scenario) -> list[Decision]:
        return [Scheduled(cphydra_schedule(self.index, x, self.k, self.p, self.timeout)) for x in test.features]


class _S3Approach:
    def __init__(self, k: int, fraction: float):
        self.k = k
        self.fraction = fraction

    def fit(self, train: Scenario, p: Portfolio):
        self.p = p
        self.budget = max(1, int(math.floor(self.fraction * train.timeout)))
        self.static = s3_build_static(train, p, self.budget)
        self.index = NeighborIndex.from_scenario(train, p)
        return self

    def decide(self, test: Scenario) -> list[Decision]:
        return [Scheduled(self.static, s3_long_runner(self.index, x, self.k, self.p)) for x in test.features]


class _SBSApproach:
    def fit(self, train: Scenario, p: Portfolio):
        self.solver = single_best(train.restrict(p.members))
        return self

    def decide(self, test: Scenario) -> list[Decision]:
        return [Single(self.solver)] * test.n_instances


class _VBSApproach:
    def fit(self, train: Scenario, p: Portfolio):
        self.p = p
        return self

    def decide(self, test: Scenario) -> list[Decision]:
        cols = self.p.columns(test)
        t = np.where(test.solved[:, cols], test.times[:, cols], np.inf)
        return [Single(self.p.members[int(np.argmin(row))]) for row in t]


def fit_approach(approach: str, train: Scenario, p: Portfolio, params: ApproachParams, fold_seed: int | None = None):
    """Trained approach object exposing ``decide(test_scenario) -> list[Decision]``."""
    fold_seed = params.seed if fold_seed is None else fold_seed
    if approach in SELECTOR_APPROACHES:
        model = _SelectorApproach(approach, params.for_strategy(approach, fold_seed))
    elif approach == "cphydra":
        model = _CPHydraApproach(params.k)
    elif approach == "s3":
        model = _S3Approach(params.k, params.s3_fraction)
    elif approach == "sbs":
        model = _SBSApproach()
    elif approach == "vbs":
        model = _VBSApproach()
    else:
        raise ScenarioError(f"unknown approach {approach!r}; expected one of {', '.join(APPROACHES)}")
    return model.fit(train, p)


@dataclass(frozen=True)
class FoldResult:
    repeat: int
    fold: int
    rows: np.ndarray
    solved: np.ndarray
    elapsed: np.ndarray
    decisions: tuple

    @property
    def psi(self) -> float:
        n = self.solved.size
        return 1.0 - (n - int(self.solved.sum())) / n if n else 0.0

    @property
    def ast(self) -> float:
        return float(self.elapsed.mean()) if self.elapsed.size else 0.0

    def static_schedules(self) -> list[Schedule]:
        return [d.schedule for d in self.decisions if isinstance(d, Scheduled)]


def evaluate_fold(s: Scenario, approach: str, p: Portfolio, plan: FoldPlan, repeat: int, fold: int,
                  params: ApproachParams) -> FoldResult:
    if approach not in APPROACHES:
        raise ScenarioError(f"unknown approach {approach!r}")
    p.validate(s)
    train_rows, test_rows = plan.train_rows(repeat, fold), plan.test_rows(repeat, fold)
    fold_seed = params.seed + repeat * plan.folds + fold
    model = fit_approach(approach, s.subset(train_rows), p, params, fold_seed)
    test = s.subset(test_rows)
    decisions = model.decide(test)
    include_features = approach != "vbs"
    outcomes = [simulate(d, inst, test, p, include_features) for d, inst in zip(decisions, test.instances)]
    return FoldResult(
        repeat,
        fold,
        test_rows,
        np.array([o.solved for o in outcomes], dtype=bool),
        np.array([o.elapsed for o in outcomes], dtype=float),
        tuple(decisions),
    )


@dataclass(frozen=True, eq=False)
class ApproachResult:
    approach: str
    size: int
    portfolio: Portfolio
    folds: tuple[FoldResult, ...]
    solved: np.ndarray  # (repeats, n_instances)
    elapsed: np.ndarray

    @property
    def outcomes(self) -> np.ndarray:
        return self.solved.reshape(-1).astype(int)

    @property
    def psi(self) -> float:
        n = self.solved.size
        return 1.0 - (n - int(self.solved.sum())) / n

    @property
    def ast(self) -> float:
        return float(self.elapsed.mean())


def _assemble(s: Scenario, approach: str, p: Portfolio, plan: FoldPlan, folds: Sequence[FoldResult]) -> ApproachResult:
    solved = np.zeros((plan.repeats, s.n_instances), dtype=bool)
    elapsed = np.zeros((plan.repeats, s.n_instances))
    for fr in folds:
        solved[fr.repeat, fr.rows] = fr.solved
        elapsed[fr.repeat, fr.rows] = fr.elapsed
    ordered = tuple(sorted(folds, key=lambda fr: (fr.repeat, fr.fold)))
    return ApproachResult(approach, len(p), p, ordered, solved, elapsed)


def cross_validate(s: Scenario, approach: str, p: Portfolio, plan: FoldPlan,
                   params: ApproachParams | None = None) -> ApproachResult:
    params = params or ApproachParams()
    folds = [evaluate_fold(s, approach, p, plan, r, f, params) for r, f in plan.splits()]
    return _assemble(s, approach, p, plan, folds)


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    scenario: Scenario
    plan: FoldPlan
    results: dict  # (approach, size) -> ApproachResult

    def keys(self) -> list[tuple[str, int]]:
        return list(self.results)

    def __getitem__(self, key: tuple[str, int]) -> ApproachResult:
        return self.results[key]


def _work(args):
    s, approach, p, plan, r, f, params = args
    return evaluate_fold(s, approach, p, plan, r, f, params)


def run_sweep(s: Scenario, approaches: Iterable[str], sizes: Iterable[int], plan: FoldPlan,
              params: ApproachParams | None = None, portfolios: dict | None = None, workers: int = 1,
              backup_rule: str = "condorcet") -> EvaluationReport:
    """Cross-validate every (approach, size); results do not depend on ``workers``."""
    from ..portfolio import build_portfolio

    params = params or ApproachParams()
    approaches = list(approaches)
    for a in approaches:
        if a not in APPROACHES:
            raise ScenarioError(f"unknown approach {a!r}; expected one of {', '.join(APPROACHES)}")
    sizes = list(sizes)
    portfolios = dict(portfolios or {})
    for n in sizes:
        if n not in portfolios:
            portfolios[n] = build_portfolio(s, n, seed=params.seed, backup_rule=backup_rule)
    items = [(s, a, portfolios[n], plan, r, f, params) for a in approaches for n in sizes for r, f in plan.splits()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            fold_results = list(pool.map(_work, items, chunksize=max(1, len(items) // (4 * workers))))
    else:
        fold_results = [_work(it) for it in items]
    per_key: dict = {}
    for it, fr in zip(items, fold_results):
        per_key.setdefault((it[1], len(it[2])), []).append(fr)
    results = {key: _assemble(s, key[0], portfolios[key[1]], plan, frs) for key, frs in per_key.items()}
    return EvaluationReport(s, plan, results)


def selection_accuracy(s: Scenario, strategy: str, p: Portfolio, plan: FoldPlan,
                       params: ApproachParams | None = None) -> float:
    """Fraction of test evaluations where the selector picks the fastest solving member."""
    params = params or ApproachParams()
    hits = total = 0
    cols = p.columns(s)
    truth = make_labels(s.times[:, cols], s.solved[:, cols])
    for r, f in plan.splits():
        fold_seed = params.seed + r * plan.folds + f
        model = fit_approach(strategy, s.subset(plan.train_rows(r, f)), p, params, fold_seed)
        test_rows = plan.test_rows(r, f)
        pred = model.predict_labels(s.subset(test_rows))
        hits += int(np.sum(pred == truth[test_rows]))
        total += test_rows.size
    return hits / total


def significance_matrix(report: EvaluationReport, keys: Sequence[tuple[str, int]] | None = None):
    """Pairwise paired t-test p-values over the binary solved vectors."""
    keys = list(keys or report.keys())
    vecs = [report[k].outcomes for k in keys]
    m = np.ones((len(keys), len(keys)))
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            m[a, b] = m[b, a] = paired_t_test(vecs[a], vecs[b])
    return keys, m

"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .evaluation import condorcet_winner, elect_backup, make_folds, paired_t_test
from .evaluation.cv import APPROACHES, ApproachParams, EvaluationReport, run_sweep
from .portfolio import build_portfolio, write_portfolio
from .scenario import (
    Scenario,
    ScenarioError,
    fastest_counts,
    filter_presolved,
    load_scenario,
    marginal_contribution,
    single_best,
    virtual_best,
)
from .scheduling import write_schedule
from .selectors import make_labels, save_model, train

log = logging.getLogger("cspfolio")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InvariantViolation(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    scenario: Path
    approaches: tuple[str, ...]
    sizes: tuple[int, ...]
    folds: int
    repeats: int
    seed: int
    out: Path
    k: int
    trees: int
    s3_fraction: float
    presolve_window: float | None
    workers: int = 1

    def validate(self, s: Scenario) -> None:
        for n in self.sizes:
            if not 1 <= n <= s.n_solvers:
                raise UsageError(f"size {n} outside [1, {s.n_solvers}]")
        if self.folds < 2:
            raise UsageError("--folds must be at least 2")
        if self.repeats < 1:
            raise UsageError("--repeats must be at least 1")
        if not 0 < self.s3_fraction <= 1:
            raise UsageError("--s3-fraction must lie in (0, 1]")
        for a in self.approaches:
            if a not in APPROACHES:
                raise UsageError(f"unknown approach {a!r}; expected one of {', '.join(APPROACHES)}")

    def params(self) -> ApproachParams:
        return ApproachParams(k=self.k, trees=self.trees, s3_fraction=self.s3_fraction, seed=self.seed)


def parse_sizes(text: str) -> tuple[int, ...]:
    """``"2..16"``, ``"3"`` or ``"2,4,6"``."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if lo > hi:
                raise UsageError(f"empty size range {text!r}")
            return tuple(range(lo, hi + 1))
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"bad size range {text!r}") from None


def _num(x: float) -> str:
    return repr(float(x))


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _load(args) -> Scenario:
    s = load_scenario(args.scenario)
    presolver = s.meta.get("presolver")
    window = getattr(args, "presolve_window", None)
    if window is None and "presolve_seconds" in s.meta:
        window = float(s.meta["presolve_seconds"])
    if window is not None:
        if presolver is None:
            raise UsageError("presolve window given but meta.csv names no presolver")
        before = s.n_instances
        s = filter_presolved(s, presolver, window)
        log.info("presolve filter (%s, %gs) removed %d instances", presolver, window, before - s.n_instances)
    if s.n_instances == 0:
        raise ScenarioError("no instances left in scenario")
    return s


def _default_sizes(s: Scenario) -> tuple[int, ...]:
    return tuple(range(min(2, s.n_solvers), min(16, s.n_solvers) + 1))


# -- commands ----------------------------------------------------------------


def cmd_stats(args) -> int:
    s = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fastest = fastest_counts(s)
    n_solved = s.solved.sum(axis=0)
    _write_rows(out / "fastest_counts.csv", ["solver", "count"], [[v, fastest[v]] for v in s.solvers])
    _write_rows(out / "marginal_contributions.csv", ["solver", "count"],
                [[v, marginal_contribution(s, v)] for v in s.solvers])
    _write_rows(out / "solved_counts.csv", ["solver", "count"], [[v, int(c)] for v, c in zip(s.solvers, n_solved)])
    rows = [[rule, elect_backup(s, rule)] for rule in ("plurality", "approval", "borda")]
    rows.append(["condorcet", condorcet_winner(s) or ""])
    _write_rows(out / "elections.csv", ["rule", "winner"], rows)
    psi, ast = virtual_best(s, s.solvers)
    unsolved = int((~s.solved.any(axis=1)).sum())
    _write_rows(out / "summary.csv", ["key", "value"], [
        ["instances", s.n_instances],
        ["solvers", s.n_solvers],
        ["unsolved", unsolved],
        ["single_best", single_best(s)],
        ["vbs_psi", _num(psi)],
        ["vbs_ast", _num(ast)],
    ])
    print(f"{s.n_instances} instances, {s.n_solvers} solvers, {unsolved} unsolved by all; "
          f"single best {single_best(s)}; VBS PSI {psi:.4f}")
    return EXIT_OK


def cmd_build_portfolio(args) -> int:
    s = _load(args)
    sizes = parse_sizes(args.sizes) if args.sizes else _default_sizes(s)
    for n in sizes:
        if not 1 <= n <= s.n_solvers:
            raise UsageError(f"size {n} outside [1, {s.n_solvers}]")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for n in sizes:
        p = build_portfolio(s, n, seed=args.seed, backup_rule=args.backup_rule)
        write_portfolio(p, out / f"portfolio_{n}.csv")
        print(f"size {n}: {' '.join(p.members)} (backup {p.backup})")
    return EXIT_OK


def cmd_train(args) -> int:
    s = _load(args)
    n = args.size or s.n_solvers
    if not 1 <= n <= s.n_solvers:
        raise UsageError(f"size {n} outside [1, {s.n_solvers}]")
    p = build_portfolio(s, n, seed=args.seed, backup_rule=args.backup_rule)
    cols = p.columns(s)
    y = make_labels(s.times[:, cols], s.solved[:, cols])
    params = {}
    if args.strategy == "knn":
        params["k"] = args.k
    if args.strategy in ("forest", "pairwise"):
        params["n_trees"] = args.trees
    model = train(args.strategy, s.features, y, runtimes=s.capped[:, cols], solved=s.solved[:, cols],
                  seed=args.seed, **params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_model(model, out / "model.pkl")
    write_portfolio(p, out / "portfolio.csv")
    print(f"trained {args.strategy} on {s.n_instances} instances, portfolio {' '.join(p.members)}")
    return EXIT_OK


def _check_report(report: EvaluationReport) -> None:
    timeout = report.scenario.timeout
    for (approach, size), res in report.results.items():
        if not (0.0 <= res.psi <= 1.0) or not (0.0 <= res.ast <= timeout):
            raise InvariantViolation(f"{approach}@{size}: metrics out of range")
        if np.any(res.elapsed > timeout):
            raise InvariantViolation(f"{approach}@{size}: simulated time exceeds timeout")
        if res.outcomes.size != report.plan.repeats * report.scenario.n_instances:
            raise InvariantViolation(f"{approach}@{size}: outcome vector has wrong length")


def write_report(report: EvaluationReport, out: Path) -> None:
    s = report.scenario
    keys = report.keys()
    _write_rows(out / "report.csv", ["approach", "size", "repeat", "fold", "psi", "ast"], [
        [a, n, fr.repeat, fr.fold, _num(fr.psi), _num(fr.ast)] for a, n in keys for fr in report[(a, n)].folds
    ])
    rows = []
    for a, n in keys:
        res = report[(a, n)]
        for r in range(report.plan.repeats):
            for i, inst in enumerate(s.instances):
                rows.append([a, n, r, inst, int(res.solved[r, i]), _num(res.elapsed[r, i])])
    _write_rows(out / "outcomes.csv", ["approach", "size", "repeat", "instance", "solved", "elapsed"], rows)
    _write_rows(out / "summary.csv", ["approach", "size", "psi", "ast"],
                [[a, n, _num(report[(a, n)].psi), _num(report[(a, n)].ast)] for a, n in keys])
    approaches = list(OrderedDict.fromkeys(a for a, _ in keys))
    sizes = sorted({n for _, n in keys})
    for metric in ("psi", "ast"):
        _write_rows(out / f"{metric}_by_size.csv", ["size", *approaches], [
            [n, *(_num(getattr(report[(a, n)], metric)) if (a, n) in report.results else "" for a in approaches)]
            for n in sizes
        ])
    sched_rows = []
    for a, n in keys:
        if a != "s3":
            continue
        for fr in report[(a, n)].folds:
            schedules = fr.static_schedules()
            if schedules:
                for rank, (v, d) in enumerate(schedules[0].slots, start=1):
                    sched_rows.append([n, fr.repeat, fr.fold, rank, v, d])
    if sched_rows:
        _write_rows(out / "static_schedules.csv", ["size", "repeat", "fold", "rank", "solver", "seconds"], sched_rows)
    write_significance(keys, [report[k].outcomes for k in keys], out / "significance.csv")


def write_significance(keys, vectors, path: Path) -> None:
    labels = [f"{a}:{n}" for a, n in keys]
    m = np.ones((len(keys), len(keys)))
    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            m[i, j] = m[j, i] = paired_t_test(vectors[i], vectors[j])
    _write_rows(path, ["approach", *labels], [[labels[i], *(_num(x) for x in m[i])] for i in range(len(keys))])


def cmd_evaluate(args) -> int:
    s = _load(args)
    cfg = RunConfig(
        scenario=Path(args.scenario),
        approaches=tuple(a.strip() for a in args.approaches.split(",") if a.strip()),
        sizes=parse_sizes(args.sizes) if args.sizes else _default_sizes(s),
        folds=args.folds,
        repeats=args.repeats,
        seed=args.seed,
        out=Path(args.out),
        k=args.k,
        trees=args.trees,
        s3_fraction=args.s3_fraction,
        presolve_window=args.presolve_window,
        workers=args.workers,
    )
    cfg.validate(s)
    plan = make_folds(s.instances, cfg.repeats, cfg.folds, cfg.seed)
    report = run_sweep(s, cfg.approaches, cfg.sizes, plan, cfg.params(), workers=cfg.workers,
                       backup_rule=args.backup_rule)
    _check_report(report)
    cfg.out.mkdir(parents=True, exist_ok=True)
    for n in cfg.sizes:
        write_portfolio(report[(cfg.approaches[0], n)].portfolio, cfg.out / f"portfolio_{n}.csv")
    write_report(report, cfg.out)
    for a, n in report.keys():
        res = report[(a, n)]
        print(f"{a:>9} size {n:>2}: PSI {100 * res.psi:6.2f}%  AST {res.ast:9.2f}s")
    return EXIT_OK


def read_outcomes(path: Path) -> "OrderedDict[tuple[str, int], list[int]]":
    vectors: OrderedDict = OrderedDict()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["approach", "size", "repeat", "instance", "solved", "elapsed"]:
            raise ScenarioError(f"{path}: unexpected header")
        for row in reader:
            if row:
                vectors.setdefault((row[0], int(row[1])), []).append(int(row[4]))
    return vectors


def cmd_compare(args) -> int:
    src = Path(args.outcomes) if args.outcomes else Path(args.out) / "outcomes.csv"
    vectors = read_outcomes(src)
    keys = list(vectors)
    lengths = {len(v) for v in vectors.values()}
    if len(lengths) > 1:
        raise ScenarioError("outcome vectors differ in length")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_significance(keys, [vectors[k] for k in keys], out / "significance.csv")
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            p = paired_t_test(vectors[a], vectors[b])
            mark = "*" if p < args.alpha else " "
            print(f"{a[0]}:{a[1]} vs {b[0]}:{b[1]}  p={p:.4g} {mark}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cspfolio", description="Algorithm-portfolio laboratory over solver runtime data.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="directory with runs.csv, features.csv, meta.csv")
            p.add_argument("--presolve-window", type=float, default=None,
                           help="drop instances the meta.csv presolver solves within W seconds")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("stats", help="fastest counts, marginal contributions, backup elections")
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("build-portfolio", help="construct portfolios by local search")
    common(p)
    p.add_argument("--sizes", default=None, help="A..B, N or comma list (default 2..16)")
    p.add_argument("--backup-rule", default="condorcet", choices=["condorcet", "plurality", "approval", "borda"])
    p.set_defaults(func=cmd_build_portfolio)

    p = sub.add_parser("train", help="train one selector on the whole scenario and save it")
    common(p)
    p.add_argument("--strategy", required=True, choices=["knn", "bayes", "tree", "forest", "pairwise", "cluster"])
    p.add_argument("--size", type=int, default=None, help="portfolio size (default: all solvers)")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--trees", type=int, default=99)
    p.add_argument("--backup-rule", default="condorcet", choices=["condorcet", "plurality", "approval", "borda"])
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="repeated cross-validation sweep")
    common(p)
    p.add_argument("--approaches", default="forest,pairwise,s3,cluster,cphydra,sbs,vbs")
    p.add_argument("--sizes", default=None, help="A..B, N or comma list (default 2..16)")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--trees", type=int, default=99)
    p.add_argument("--s3-fraction", type=float, default=0.10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--backup-rule", default="condorcet", choices=["condorcet", "plurality", "approval", "borda"])
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="paired t-tests over an outcomes.csv")
    p.add_argument("--out", required=True, help="output directory (and default outcomes.csv location)")
    p.add_argument("--outcomes", default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"cspfolio: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ScenarioError, OSError) as exc:
        print(f"cspfolio: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvariantViolation as exc:
        print(f"cspfolio: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())

"""Runtime scenarios: ingestion, presolve filtering and per-solver statistics.

A scenario is the full instances x solvers matrix of recorded runs together
with the instance features and their extraction cost. Everything downstream
(portfolio construction, selectors, simulation) reads from it and never
mutates it.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

__all__ = [
    "Status",
    "RunRecord",
    "FeatureRecord",
    "Scenario",
    "Portfolio",
    "ScenarioError",
    "ScenarioParseError",
    "parse_scenario",
    "load_scenario",
    "filter_presolved",
    "fastest_counts",
    "marginal_contribution",
    "single_best",
    "virtual_best",
]


class ScenarioError(ValueError):
    """Raised for semantically invalid scenario data or arguments."""


class ScenarioParseError(ScenarioError):
    def __init__(self, message: str, file: str, line: int, column: int | None = None):
        self.file = file
        self.line = line
        self.column = column
        where = f"{file}:{line}" if column is None else f"{file}:{line}:{column}"
        super().__init__(f"{where}: {message}")


class Status(enum.IntEnum):
    SOLVED = 0
    TIMEOUT = 1
    ERROR = 2

    @classmethod
    def parse(cls, token: str) -> "Status":
        return cls[token.upper()]

    def __str__(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class RunRecord:
    instance_id: str
    solver_id: str
    status: Status
    time: float


@dataclass(frozen=True)
class FeatureRecord:
    instance_id: str
    feature_cost: float
    features: tuple[float, ...]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Scenario:
    """Immutable runtime matrix.

    ``status`` and ``times`` are ``(n_instances, n_solvers)`` arrays indexed
    in ``instances`` x ``solvers`` order; ``features`` is
    ``(n_instances, n_features)`` and ``feature_cost`` is per instance.
    """

    solvers: tuple[str, ...]
    instances: tuple[str, ...]
    status: np.ndarray
    times: np.ndarray
    features: np.ndarray
    feature_cost: np.ndarray
    timeout: float
    feature_names: tuple[str, ...] = ()
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        n, s = len(self.instances), len(self.solvers)
        object.__setattr__(self, "solvers", tuple(self.solvers))
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(self, "status", _frozen(np.asarray(self.status, dtype=np.int8).reshape(n, s)))
        object.__setattr__(self, "times", _frozen(np.asarray(self.times, dtype=float).reshape(n, s)))
        feats = np.asarray(self.features, dtype=float)
        if feats.ndim != 2:
            feats = feats.reshape(n, -1)
        object.__setattr__(self, "features", _frozen(feats))
        object.__setattr__(self, "feature_cost", _frozen(np.asarray(self.feature_cost, dtype=float).reshape(n)))
        object.__setattr__(self, "meta", dict(self.meta))
        if not self.feature_names:
            names = tuple(f"f{j + 1}" for j in range(self.features.shape[1]))
            object.__setattr__(self, "feature_names", names)
        self._check()

    def _check(self) -> None:
        if not self.timeout > 0:
            raise ScenarioError("timeout must be positive")
        if len(set(self.solvers)) != len(self.solvers):
            raise ScenarioError("duplicate solver identifiers")
        if len(set(self.instances)) != len(self.instances):
            raise ScenarioError("duplicate instance identifiers")
        if self.features.shape[0] != len(self.instances):
            raise ScenarioError("feature matrix row count does not match instances")
        if len(self.feature_names) != self.features.shape[1]:
            raise ScenarioError("feature_names length does not match feature matrix")
        if np.any(self.times < 0) or np.any(self.times > self.timeout):
            raise ScenarioError("run times must lie in [0, timeout]")
        timed_out = self.status == Status.TIMEOUT
        if np.any(self.times[timed_out] != self.timeout):
            raise ScenarioError("timeout runs must record exactly the timeout")
        if np.any(self.feature_cost < 0) or not np.all(np.isfinite(self.features)):
            raise ScenarioError("feature costs must be non-negative and features finite")

    @property
    def n_instances(self) -> int:
        return len(self.instances)

    @property
    def n_solvers(self) -> int:
        return len(self.solvers)

    @cached_property
    def solved(self) -> np.ndarray:
        """Boolean mask of runs that count as solved (boundary inclusive)."""
        mask = (self.status == Status.SOLVED) & (self.times <= self.timeout)
        mask.setflags(write=False)
        return mask

    @cached_property
    def capped(self) -> np.ndarray:
        """Run time if solved, otherwise the full timeout."""
        out = np.where(self.solved, self.times, self.timeout)
        out.setflags(write=False)
        return out

    @cached_property
    def _solver_pos(self) -> dict[str, int]:
        return {v: j for j, v in enumerate(self.solvers)}

    @cached_property
    def _instance_pos(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.instances)}

    def solver_index(self, solver: str) -> int:
        try:
            return self._solver_pos[solver]
        except KeyError:
            raise ScenarioError(f"unknown solver {solver!r}") from None

    def instance_index(self, instance: str) -> int:
        try:
            return self._instance_pos[instance]
        except KeyError:
            raise ScenarioError(f"unknown instance {instance!r}") from None

    def run(self, instance: str, solver: str) -> RunRecord:
        i, j = self.instance_index(instance), self.solver_index(solver)
        return RunRecord(instance, solver, Status(int(self.status[i, j])), float(self.times[i, j]))

    def feature_record(self, instance: str) -> FeatureRecord:
        i = self.instance_index(instance)
        return FeatureRecord(instance, float(self.feature_cost[i]), tuple(self.features[i].tolist()))

    def runs(self) -> Iterable[RunRecord]:
        for i, inst in enumerate(self.instances):
            for j, solver in enumerate(self.solvers):
                yield RunRecord(inst, solver, Status(int(self.status[i, j])), float(self.times[i, j]))

    def subset(self, rows: Sequence[int] | np.ndarray) -> "Scenario":
        """Scenario restricted to the given instance rows (in the given order)."""
        rows = np.asarray(rows, dtype=int)
        return Scenario(
            solvers=self.solvers,
            instances=tuple(self.instances[i] for i in rows),
            status=self.status[rows],
            times=self.times[rows],
            features=self.features[rows],
            feature_cost=self.feature_cost[rows],
            timeout=self.timeout,
            feature_names=self.feature_names,
            meta=self.meta,
        )

    def restrict(self, solvers: Sequence[str]) -> "Scenario":
        """Scenario over a subset of solvers, in the given order."""
        cols = [self.solver_index(v) for v in solvers]
        return Scenario(
            solvers=tuple(solvers),
            instances=self.instances,
            status=self.status[:, cols],
            times=self.times[:, cols],
            features=self.features,
            feature_cost=self.feature_cost,
            timeout=self.timeout,
            feature_names=self.feature_names,
            meta=self.meta,
        )


@dataclass(frozen=True)
class Portfolio:
    """Ordered set of solvers plus the backup run when a selection fails."""

    members: tuple[str, ...]
    backup: str

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ScenarioError("portfolio must have at least one member")
        if len(set(self.members)) != len(self.members):
            raise ScenarioError("portfolio members must be distinct")

    def __len__(self) -> int:
        return len(self.members)

    def validate(self, s: Scenario) -> None:
        for v in (*self.members, self.backup):
            s.solver_index(v)

    def columns(self, s: Scenario) -> list[int]:
        return [s.solver_index(v) for v in self.members]


# -- parsing -----------------------------------------------------------------

RUNS_HEADER = ["instance", "solver", "status", "time"]
META_HEADER = ["key", "value"]


def _read_rows(text: str | TextIO, name: str) -> list[tuple[int, list[str]]]:
    if not isinstance(text, str):
        text = text.read()
    reader = csv.reader(io.StringIO(text, newline=""))
    rows = []
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        rows.append((reader.line_num, [c.strip() for c in row]))
    if not rows:
        raise ScenarioParseError("empty file, header expected", name, 1)
    return rows


def _number(token: str, name: str, line: int, col: int, what: str) -> float:
    try:
        x = float(token)
    except ValueError:
        raise ScenarioParseError(f"non-numeric {what} {token!r}", name, line, col) from None
    if not math.isfinite(x):
        raise ScenarioParseError(f"non-finite {what} {token!r}", name, line, col)
    return x


def _parse_meta(text: str | TextIO) -> tuple[dict[str, str], float]:
    name = "meta.csv"
    rows = _read_rows(text, name)
    line, header = rows[0]
    if header != META_HEADER:
        raise ScenarioParseError(f"expected header {','.join(META_HEADER)}", name, line, 1)
    meta: dict[str, str] = {}
    for line, row in rows[1:]:
        if len(row) != 2:
            raise ScenarioParseError(f"expected 2 fields, got {len(row)}", name, line, 1)
        if row[0] in meta:
            raise ScenarioParseError(f"duplicate key {row[0]!r}", name, line, 1)
        meta[row[0]] = row[1]
    if "timeout_seconds" not in meta:
        raise ScenarioParseError("missing required key timeout_seconds", name, line)
    t_line = next(ln for ln, r in rows[1:] if r[0] == "timeout_seconds")
    timeout = _number(meta["timeout_seconds"], name, t_line, 2, "timeout")
    if timeout <= 0:
        raise ScenarioParseError("timeout must be positive", name, t_line, 2)
    for key in ("presolve_seconds",):
        if key in meta:
            ln = next(ln for ln, r in rows[1:] if r[0] == key)
            if _number(meta[key], name, ln, 2, key) < 0:
                raise ScenarioParseError(f"{key} must be non-negative", name, ln, 2)
    return meta, timeout


def parse_scenario(runs_text: str | TextIO, features_text: str | TextIO, meta_text: str | TextIO) -> Scenario:
    """Build a scenario from the three CSV streams.

    Instances and solvers are ordered by identifier, so the result does not
    depend on row order in the files.
    """
    meta, timeout = _parse_meta(meta_text)

    name = "features.csv"
    rows = _read_rows(features_text, name)
    line, header = rows[0]
    if len(header) < 2 or header[:2] != ["instance", "cost"]:
        raise ScenarioParseError("expected header instance,cost,f1,...,fm", name, line, 1)
    feature_names = tuple(header[2:])
    width = len(header)
    feats: dict[str, tuple[float, list[float]]] = {}
    for line, row in rows[1:]:
        if len(row) != width:
            raise ScenarioParseError(f"ragged row: expected {width} fields, got {len(row)}", name, line, 1)
        inst = row[0]
        if inst in feats:
            raise ScenarioParseError(f"duplicate feature row for {inst!r}", name, line, 1)
        cost = _number(row[1], name, line, 2, "cost")
        if cost < 0:
            raise ScenarioParseError("negative feature cost", name, line, 2)
        vec = [_number(tok, name, line, k + 3, "feature") for k, tok in enumerate(row[2:])]
        feats[inst] = (cost, vec)

    name = "runs.csv"
    rows = _read_rows(runs_text, name)
    line, header = rows[0]
    if header != RUNS_HEADER:
        raise ScenarioParseError(f"expected header {','.join(RUNS_HEADER)}", name, line, 1)
    cells: dict[tuple[str, str], tuple[Status, float]] = {}
    for line, row in rows[1:]:
        if len(row) != 4:
            raise ScenarioParseError(f"expected 4 fields, got {len(row)}", name, line, 1)
        inst, solver, token, tok_time = row
        try:
            status = Status.parse(token)
        except KeyError:
            raise ScenarioParseError(f"unknown status token {token!r}", name, line, 3) from None
        t = round(_number(tok_time, name, line, 4, "time"), 3)
        if t < 0:
            raise ScenarioParseError("negative time", name, line, 4)
        if t > timeout:
            raise ScenarioParseError(f"time exceeds timeout ({t} > {timeout})", name, line, 4)
        if status is Status.TIMEOUT and t != timeout:
            raise ScenarioParseError(f"timeout row must record time {timeout}, got {t}", name, line, 4)
        if (inst, solver) in cells:
            raise ScenarioParseError(f"duplicate cell ({inst}, {solver})", name, line, 1)
        cells[(inst, solver)] = (status, t)

    instances = sorted({i for i, _ in cells} | set(feats))
    solvers = sorted({v for _, v in cells})
    status = np.empty((len(instances), len(solvers)), dtype=np.int8)
    times = np.empty((len(instances), len(solvers)))
    for a, inst in enumerate(instances):
        if inst not in feats:
            raise ScenarioParseError(f"no feature row for instance {inst!r}", "features.csv", len(feats) + 2)
        for b, solver in enumerate(solvers):
            try:
                st, t = cells[(inst, solver)]
            except KeyError:
                raise ScenarioParseError(
                    f"missing cell ({inst}, {solver})", "runs.csv", len(rows) + 1
                ) from None
            status[a, b] = st
            times[a, b] = t
    return Scenario(
        solvers=tuple(solvers),
        instances=tuple(instances),
        status=status,
        times=times,
        features=np.array([feats[i][1] for i in instances], dtype=float).reshape(len(instances), len(feature_names)),
        feature_cost=np.array([feats[i][0] for i in instances], dtype=float),
        timeout=timeout,
        feature_names=feature_names,
        meta=meta,
    )


def load_scenario(directory: str | Path) -> Scenario:
    """Read ``runs.csv``, ``features.csv`` and ``meta.csv`` from a directory."""
    d = Path(directory)
    texts = []
    for fname in ("runs.csv", "features.csv", "meta.csv"):
        with open(d / fname, encoding="utf-8", newline="") as fh:
            texts.append(fh.read())
    return parse_scenario(*texts)


def write_scenario(s: Scenario, directory: str | Path) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "runs.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUNS_HEADER)
        for r in s.runs():
            w.writerow([r.instance_id, r.solver_id, str(r.status), f"{r.time:.3f}"])
    with open(d / "features.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance", "cost", *s.feature_names])
        for i, inst in enumerate(s.instances):
            w.writerow([inst, repr(float(s.feature_cost[i])), *(repr(float(x)) for x in s.features[i])])
    meta = dict(s.meta)
    meta["timeout_seconds"] = repr(float(s.timeout))
    with open(d / "meta.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(META_HEADER)
        for k in sorted(meta):
            w.writerow([k, meta[k]])


# -- statistics --------------------------------------------------------------


def filter_presolved(s: Scenario, presolver: str, presolve_window: float) -> Scenario:
    """Drop instances the presolver solves within the first ``presolve_window`` seconds."""
    if presolve_window < 0:
        raise ScenarioError("presolve window must be non-negative")
    j = s.solver_index(presolver)
    presolved = s.solved[:, j] & (s.times[:, j] <= presolve_window)
    return s.subset(np.flatnonzero(~presolved))


def fastest_counts(s: Scenario) -> dict[str, int]:
    """Instances on which each solver is the fastest; exact ties credit every tied solver."""
    t = np.where(s.solved, s.times, np.inf)
    best = t.min(axis=1, keepdims=True)
    winners = s.solved & (t == best)
    return {v: int(c) for v, c in zip(s.solvers, winners.sum(axis=0))}


def marginal_contribution(s: Scenario, v: str) -> int:
    """Instances solved by ``v`` and by no other solver."""
    j = s.solver_index(v)
    others = np.delete(s.solved, j, axis=1).any(axis=1)
    return int(np.sum(s.solved[:, j] & ~others))


def single_best(s: Scenario) -> str:
    """Most solved instances, then lowest mean capped time, then lowest index."""
    if not s.solvers:
        raise ScenarioError("scenario has no solvers")
    solved = s.solved.sum(axis=0)
    ast = s.capped.mean(axis=0) if s.n_instances else np.zeros(s.n_solvers)
    order = sorted(range(s.n_solvers), key=lambda j: (-int(solved[j]), float(ast[j]), j))
    return s.solvers[order[0]]


def virtual_best(s: Scenario, p: Portfolio | Sequence[str]) -> tuple[float, float]:
    """(PSI, AST) of the per-instance oracle over the portfolio; feature cost is excluded."""
    members = p.members if isinstance(p, Portfolio) else tuple(p)
    cols = [s.solver_index(v) for v in members]
    if s.n_instances == 0:
        return 0.0, 0.0
    unsolved = int((~s.solved[:, cols].any(axis=1)).sum())
    psi = 1.0 - unsolved / s.n_instances
    ast = float(s.capped[:, cols].min(axis=1).mean())
    return psi, ast

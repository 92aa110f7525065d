from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..scenario import ScenarioError


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """``assignment[r, i]`` is the test fold of instance ``i`` in repeat ``r``."""

    repeats: int
    folds: int
    seed: int
    assignment: np.ndarray

    def test_rows(self, repeat: int, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment[repeat] == fold)

    def train_rows(self, repeat: int, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment[repeat] != fold)

    def splits(self):
        for r in range(self.repeats):
            for f in range(self.folds):
                yield r, f


def make_folds(instances: Sequence | int, repeats: int = 5, folds: int = 5, seed: int = 0) -> FoldPlan:
    """Seeded shuffle per repeat, then round-robin fold assignment."""
    n = instances if isinstance(instances, int) else len(instances)
    if folds < 2 or repeats < 1 or n < folds:
        raise ScenarioError(f"cannot split {n} instances into {folds} folds x {repeats} repeats")
    rng = np.random.default_rng(seed)
    assignment = np.empty((repeats, n), dtype=int)
    for r in range(repeats):
        perm = rng.permutation(n)
        assignment[r, perm] = np.arange(n) % folds
    assignment.setflags(write=False)
    return FoldPlan(repeats, folds, seed, assignment)

"""CART trees, bagged forests and the cost-sensitive pairwise forest."""

from __future__ import annotations

import itertools
import math

import numpy as np
from sklearn.tree import DecisionTreeClassifier

from .base import NO_SOLVER, BaseSelector, label_order, majority


def _resolve_max_features(max_features, m: int):
    if max_features == "sqrt":
        return min(m, math.ceil(math.sqrt(m)))
    return max_features


class TreeBag:
    """Bag of gini CART trees; tree ``t`` uses seed ``seed + t``.

    A bag of a single tree trains on the identity sample, so it reproduces
    a plain tree with the same seed and feature setting.
    """

    def __init__(self, n_trees, max_features, max_depth, min_samples_leaf, bootstrap, seed):
        self.n_trees = n_trees
        self.max_features = max_features
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.bootstrap = bootstrap
        self.seed = seed

    def fit(self, Z, y, sample_weight=None):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        n, m = Z.shape
        max_features = _resolve_max_features(self.max_features, m)
        self.trees_ = []
        for t in range(self.n_trees):
            if self.bootstrap and self.n_trees > 1:
                idx = np.random.default_rng(self.seed + t).integers(0, n, n)
            else:
                idx = np.arange(n)
            tree = DecisionTreeClassifier(
                criterion="gini",
                max_features=max_features,
                max_depth=self.max_depth,
                min_samples_leaf=self.min_samples_leaf,
                random_state=self.seed + t,
            )
            w = None if sample_weight is None else sample_weight[idx]
            tree.fit(Z[idx], y[idx], sample_weight=w)
            self.trees_.append(tree)
        return self

    def predict(self, Z):
        votes = np.stack([tree.predict(Z) for tree in self.trees_], axis=1).astype(int)
        return np.array([majority(row) for row in votes], dtype=int)


class TreeSelector(BaseSelector):
    def __init__(self, max_depth=None, min_samples_leaf: int = 1, seed: int = 0):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.seed = seed

    def _fit(self, Z, y, runtimes, solved):
        self.tree_ = DecisionTreeClassifier(
            criterion="gini",
            max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            random_state=self.seed,
        ).fit(Z, y)

    def _predict(self, Z):
        return self.tree_.predict(Z)


class ForestSelector(BaseSelector):
    """Random forest by majority vote; ``max_features="sqrt"`` means ceil(sqrt(m)) per split."""

    def __init__(self, n_trees: int = 99, max_features="sqrt", max_depth=None, min_samples_leaf: int = 1,
                 bootstrap: bool = True, seed: int = 0):
        self.n_trees = n_trees
        self.max_features = max_features
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.bootstrap = bootstrap
        self.seed = seed

    def _fit(self, Z, y, runtimes, solved):
        self.bag_ = TreeBag(self.n_trees, self.max_features, self.max_depth, self.min_samples_leaf,
                            self.bootstrap, self.seed).fit(Z, y)

    def _predict(self, Z):
        return self.bag_.predict(Z)


class PairwiseSelector(BaseSelector):
    """One weighted forest per member pair, combined by voting.

    The forest for pair (a, b) learns which of the two is faster, with each
    example weighted by the absolute runtime difference (unsolved runs count
    as the timeout). Examples nobody solves and examples with equal times are
    left out of that pair. The member with the most pair wins is selected;
    vote ties go to the member that solved more training instances, then the
    lowest index.
    """

    requires_runtimes = True

    def __init__(self, n_trees: int = 99, max_features="sqrt", max_depth=None, min_samples_leaf: int = 1,
                 bootstrap: bool = True, seed: int = 0):
        self.n_trees = n_trees
        self.max_features = max_features
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.bootstrap = bootstrap
        self.seed = seed

    def _default_winner(self, a: int, b: int) -> int:
        return min((a, b), key=lambda j: (-int(self.solved_counts_[j]), j))

    def _fit(self, Z, y, runtimes, solved):
        self.pairs_ = list(itertools.combinations(range(self.n_members_), 2))
        self.pair_models_ = []
        for p, (a, b) in enumerate(self.pairs_):
            diff = runtimes[:, a] - runtimes[:, b]
            keep = (y != NO_SOLVER) & (diff != 0)
            if not keep.any():
                self.pair_models_.append(self._default_winner(a, b))
                continue
            target = np.where(diff[keep] < 0, a, b)
            if np.all(target == target[0]):
                self.pair_models_.append(int(target[0]))
                continue
            bag = TreeBag(self.n_trees, self.max_features, self.max_depth, self.min_samples_leaf,
                          self.bootstrap, self.seed + p * self.n_trees)
            self.pair_models_.append(bag.fit(Z[keep], target, sample_weight=np.abs(diff[keep])))

    def _votes(self, Z) -> np.ndarray:
        votes = np.zeros((Z.shape[0], self.n_members_), dtype=int)
        rows = np.arange(Z.shape[0])
        for model in self.pair_models_:
            if isinstance(model, TreeBag):
                winners = model.predict(Z)
            else:
                winners = np.full(Z.shape[0], model, dtype=int)
            np.add.at(votes, (rows, winners), 1)
        return votes

    def votes(self, X) -> np.ndarray:
        """Per-member pair wins, shape ``(n_samples, n_members)``."""
        return self._votes(self._prepare(X))

    def pair_predict(self, X, a: int, b: int) -> np.ndarray:
        Z = self._prepare(X)
        model = self.pair_models_[self.pairs_.index((min(a, b), max(a, b)))]
        if isinstance(model, TreeBag):
            return model.predict(Z)
        return np.full(Z.shape[0], model, dtype=int)

    def _predict(self, Z):
        votes = self._votes(Z)
        order = sorted(range(self.n_members_), key=lambda j: (-int(self.solved_counts_[j]), j))
        out = np.empty(Z.shape[0], dtype=int)
        for r in range(Z.shape[0]):
            out[r] = min(order, key=lambda j: (-votes[r, j], order.index(j)))
        return out


__all__ = ["TreeBag", "TreeSelector", "ForestSelector", "PairwiseSelector", "label_order"]

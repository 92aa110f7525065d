"""Shared estimator plumbing for per-instance solver selectors.

Selectors follow the scikit-learn estimator protocol. Labels are portfolio
member indices (``0 .. n_members - 1``) or :data:`NO_SOLVER` for instances
no member solves.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.preprocessing import StandardScaler
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

NO_SOLVER = -1


def make_labels(runtimes: np.ndarray, solved: np.ndarray) -> np.ndarray:
    """Fastest solving member per row (lowest index on ties), else ``NO_SOLVER``."""
    runtimes = np.asarray(runtimes, dtype=float)
    solved = np.asarray(solved, dtype=bool)
    t = np.where(solved, runtimes, np.inf)
    labels = np.argmin(t, axis=1)
    labels[~solved.any(axis=1)] = NO_SOLVER
    return labels.astype(int)


def label_order(label: int) -> float:
    """Sort key used for final ties: lowest member index first, NO_SOLVER last."""
    return np.inf if label == NO_SOLVER else float(label)


def majority(labels, weights=None) -> int:
    """Most frequent label, ties to :func:`label_order`."""
    labels = np.asarray(labels, dtype=int)
    weights = np.ones(len(labels)) if weights is None else np.asarray(weights, dtype=float)
    totals: dict[int, float] = {}
    for lab, w in zip(labels.tolist(), weights.tolist()):
        totals[lab] = totals.get(lab, 0.0) + w
    return min(totals, key=lambda lab: (-totals[lab], label_order(lab)))


class BaseSelector(ClassifierMixin, BaseEstimator):
    """Fit-time normalization, validation and degenerate-label handling.

    Features are z-scored with statistics from the training data only;
    constant features keep scale 1. Subclasses implement ``_fit`` and
    ``_predict`` on normalized matrices.
    """

    requires_runtimes = False

    def fit(self, X, y, runtimes=None, solved=None):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        y = y.astype(int)
        if np.any((y < NO_SOLVER)):
            raise ValueError("labels must be member indices or NO_SOLVER")
        if runtimes is not None:
            runtimes = check_array(runtimes, dtype=float, ensure_min_features=1)
            solved = np.ones_like(runtimes, dtype=bool) if solved is None else np.asarray(solved, dtype=bool)
            if runtimes.shape[0] != X.shape[0] or solved.shape != runtimes.shape:
                raise ValueError("runtimes/solved must have one row per training example")
            self.n_members_ = runtimes.shape[1]
            self.solved_counts_ = solved.sum(axis=0)
        elif self.requires_runtimes:
            raise ValueError(f"{type(self).__name__} needs per-member runtimes")
        else:
            self.n_members_ = int(max(y.max(), 0)) + 1
            self.solved_counts_ = np.bincount(y[y >= 0], minlength=self.n_members_)
        if np.any(y >= self.n_members_):
            raise ValueError("label exceeds number of members")
        self.normalizer_ = StandardScaler().fit(X)
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.unique(y)
        self._fit(self.normalizer_.transform(X), y, runtimes, solved)
        return self

    def _prepare(self, X) -> np.ndarray:
        check_is_fitted(self, "normalizer_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return self.normalizer_.transform(X)

    def predict(self, X) -> np.ndarray:
        Z = self._prepare(X)
        if len(self.classes_) == 1:
            return np.full(Z.shape[0], self.classes_[0], dtype=int)
        return np.asarray(self._predict(Z), dtype=int)

    def select(self, features) -> int:
        """Selection for a single feature vector."""
        return int(self.predict(np.asarray(features, dtype=float).reshape(1, -1))[0])

    def _fit(self, Z, y, runtimes, solved):  # pragma: no cover - abstract
        raise NotImplementedError

    def _predict(self, Z):  # pragma: no cover - abstract
        raise NotImplementedError

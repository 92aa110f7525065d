from __future__ import annotations

import numpy as np

from .base import BaseSelector, label_order


class GaussianBayesSelector(BaseSelector):
    """Gaussian naive Bayes with a floor on per-class feature variances."""

    def __init__(self, var_floor: float = 1e-9):
        self.var_floor = var_floor

    def _fit(self, Z, y, runtimes, solved):
        # classes_ is sorted ascending, so NO_SOLVER (if present) sits first;
        # reorder so ties resolve toward the lowest member index
        self.order_ = np.array(sorted(self.classes_, key=label_order), dtype=int)
        self.log_prior_ = np.log(np.array([np.mean(y == c) for c in self.order_]))
        self.mean_ = np.array([Z[y == c].mean(axis=0) for c in self.order_])
        self.var_ = np.maximum(np.array([Z[y == c].var(axis=0) for c in self.order_]), self.var_floor)

    def _joint_log_likelihood(self, Z):
        ll = -0.5 * (np.log(2 * np.pi * self.var_)[None, :, :] + (Z[:, None, :] - self.mean_[None, :, :]) ** 2 / self.var_[None, :, :])
        return ll.sum(axis=2) + self.log_prior_[None, :]

    def _predict(self, Z):
        # argmax keeps the first maximum
        return self.order_[np.argmax(self._joint_log_likelihood(Z), axis=1)]

from __future__ import annotations

import warnings

import numpy as np

from .base import BaseSelector, label_order


class KNNSelector(BaseSelector):
    """Majority label among the ``k`` nearest training instances.

    Distances are Euclidean in z-score space. Label ties go to the label
    whose tied neighbors are closer on average, then to the lowest member
    index.
    """

    def __init__(self, k: int = 10):
        self.k = k

    def _fit(self, Z, y, runtimes, solved):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        self.train_ = Z
        self.labels_ = y

    def kneighbors(self, X) -> tuple[np.ndarray, np.ndarray]:
        """(distances, indices) of the nearest training rows, stable on distance ties."""
        Z = self._prepare(X)
        return self._kneighbors(Z)

    def _kneighbors(self, Z):
        k = self.k
        if k > self.train_.shape[0]:
            warnings.warn(f"k={k} exceeds training size {self.train_.shape[0]}; clamped", stacklevel=3)
            k = self.train_.shape[0]
        d = np.sqrt(((Z[:, None, :] - self.train_[None, :, :]) ** 2).sum(axis=2))
        idx = np.argsort(d, axis=1, kind="stable")[:, :k]
        return np.take_along_axis(d, idx, axis=1), idx

    def _predict(self, Z):
        dist, idx = self._kneighbors(Z)
        out = np.empty(Z.shape[0], dtype=int)
        for r in range(Z.shape[0]):
            labs = self.labels_[idx[r]]
            stats = {}
            for lab in np.unique(labs):
                sel = labs == lab
                stats[int(lab)] = (-int(sel.sum()), float(dist[r][sel].mean()), label_order(int(lab)))
            out[r] = min(stats, key=stats.get)
        return out

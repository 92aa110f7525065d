"""g-means clustering and the nearest-cluster solver selector."""

from __future__ import annotations

import numpy as np
from scipy.special import log_ndtr

from .base import BaseSelector

# Critical values of the Anderson-Darling statistic (small-sample corrected)
# for a normal with estimated mean and variance.
AD_CRITICAL = {
    0.1: 0.631,
    0.05: 0.752,
    0.025: 0.873,
    0.01: 1.035,
    0.005: 1.159,
    0.0001: 1.8692,
}


def anderson_darling(x: np.ndarray) -> float:
    """Corrected statistic A*^2 of a sample against N(0, 1).

    ``x`` is expected to be standardized already.
    """
    z = np.sort(np.asarray(x, dtype=float))
    n = z.size
    i = np.arange(1, n + 1)
    a2 = -n - np.sum((2 * i - 1) * (log_ndtr(z) + log_ndtr(-z[::-1]))) / n
    return float(a2 * (1 + 4.0 / n - 25.0 / n**2))


def kmeans(X: np.ndarray, centers: np.ndarray, max_iter: int = 300) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd iterations from the given centers; empty clusters keep their center."""
    centers = np.array(centers, dtype=float)
    labels = None
    for _ in range(max_iter):
        d = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(d, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(len(centers)):
            mask = labels == j
            if mask.any():
                centers[j] = X[mask].mean(axis=0)
    return centers, labels


class GMeans:
    """Grow k by splitting clusters that fail a Gaussianity test.

    Each cluster is tentatively split by 2-means started along its principal
    axis; the split is kept when the members projected onto the axis joining
    the two child centers are not normal at the chosen significance
    (Anderson-Darling). Fully deterministic.
    """

    def __init__(self, significance: float = 0.0001, max_clusters: int | None = None,
                 min_cluster_size: int = 4, max_iter: int = 300):
        self.significance = significance
        self.max_clusters = max_clusters
        self.min_cluster_size = min_cluster_size
        self.max_iter = max_iter

    def _try_split(self, Xc: np.ndarray, critical: float):
        if Xc.shape[0] < 2 * self.min_cluster_size:
            return None
        c = Xc.mean(axis=0)
        cov = np.atleast_2d(np.cov(Xc, rowvar=False))
        vals, vecs = np.linalg.eigh(cov)
        lam, s = vals[-1], vecs[:, -1]
        if lam <= 0:
            return None
        m = s * np.sqrt(2 * lam / np.pi)
        children, labels = kmeans(Xc, np.stack([c + m, c - m]), self.max_iter)
        if np.bincount(labels, minlength=2).min() < self.min_cluster_size:
            return None
        v = children[0] - children[1]
        norm2 = float(v @ v)
        if norm2 == 0:
            return None
        proj = Xc @ v / norm2
        sd = proj.std()
        if sd == 0:
            return None
        if anderson_darling((proj - proj.mean()) / sd) > critical:
            return children
        return None

    def fit(self, X):
        X = np.asarray(X, dtype=float)
        try:
            critical = AD_CRITICAL[self.significance]
        except KeyError:
            raise ValueError(f"no critical value for significance {self.significance}") from None
        limit = self.max_clusters or X.shape[0]
        centers = X.mean(axis=0, keepdims=True)
        labels = np.zeros(X.shape[0], dtype=int)
        while len(centers) < limit:
            new_centers = []
            changed = False
            count = len(centers)
            for j, c in enumerate(centers):
                children = self._try_split(X[labels == j], critical) if count < limit else None
                if children is not None:
                    new_centers.extend(children)
                    count += 1
                    changed = True
                else:
                    new_centers.append(c)
            if not changed:
                break
            centers, labels = kmeans(X, np.array(new_centers), self.max_iter)
        self.cluster_centers_ = centers
        self.labels_ = labels
        return self

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        d = ((X[:, None, :] - self.cluster_centers_[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(d, axis=1)


class ClusterSelector(BaseSelector):
    """Nearest g-means cluster, each cluster mapped to its best member.

    A cluster's member is the one solving most of the cluster's training
    instances, ties to lower mean capped time, then lowest index.
    """

    requires_runtimes = True

    def __init__(self, significance: float = 0.0001, max_clusters: int | None = None,
                 min_cluster_size: int = 4, seed: int = 0):
        self.significance = significance
        self.max_clusters = max_clusters
        self.min_cluster_size = min_cluster_size
        self.seed = seed

    def _fit(self, Z, y, runtimes, solved):
        self.gmeans_ = GMeans(self.significance, self.max_clusters, self.min_cluster_size).fit(Z)
        assignment = []
        for j in range(len(self.gmeans_.cluster_centers_)):
            mask = self.gmeans_.labels_ == j
            if not mask.any():
                assignment.append(int(np.argmax(self.solved_counts_)))
                continue
            n_solved = solved[mask].sum(axis=0)
            mean_t = runtimes[mask].mean(axis=0)
            assignment.append(min(range(self.n_members_), key=lambda v: (-int(n_solved[v]), float(mean_t[v]), v)))
        self.cluster_solver_ = np.array(assignment, dtype=int)

    def _predict(self, Z):
        return self.cluster_solver_[self.gmeans_.predict(Z)]

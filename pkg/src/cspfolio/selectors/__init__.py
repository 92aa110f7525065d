"""Per-instance solver selectors with a scikit-learn estimator interface."""

from __future__ import annotations

import pickle
from pathlib import Path

from .base import NO_SOLVER, BaseSelector, make_labels
from .bayes import GaussianBayesSelector
from .cluster import ClusterSelector, GMeans, anderson_darling
from .knn import KNNSelector
from .trees import ForestSelector, PairwiseSelector, TreeSelector

STRATEGIES = {
    "knn": KNNSelector,
    "bayes": GaussianBayesSelector,
    "tree": TreeSelector,
    "forest": ForestSelector,
    "pairwise": PairwiseSelector,
    "cluster": ClusterSelector,
}

MODEL_FORMAT = "cspfolio-selector"
MODEL_VERSION = 1


def make_selector(strategy: str, **params) -> BaseSelector:
    """Instantiate a selector by strategy tag, rejecting unknown parameters."""
    try:
        cls = STRATEGIES[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {sorted(STRATEGIES)}") from None
    valid = cls._get_param_names()
    unknown = sorted(set(params) - set(valid))
    if unknown:
        raise ValueError(f"unknown parameter(s) {unknown} for strategy {strategy!r}")
    return cls(**params)


def train(strategy: str, X, y, runtimes=None, solved=None, seed: int = 0, **params) -> BaseSelector:
    if "seed" in STRATEGIES.get(strategy, BaseSelector)._get_param_names():
        params.setdefault("seed", seed)
    return make_selector(strategy, **params).fit(X, y, runtimes=runtimes, solved=solved)


def save_model(model: BaseSelector, path: str | Path) -> None:
    with open(path, "wb") as fh:
        pickle.dump({"format": MODEL_FORMAT, "version": MODEL_VERSION, "model": model}, fh)


def load_model(path: str | Path) -> BaseSelector:
    with open(path, "rb") as fh:
        payload = pickle.load(fh)
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a selector model file")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported model version {payload.get('version')}")
    return payload["model"]


__all__ = [
    "NO_SOLVER",
    "STRATEGIES",
    "BaseSelector",
    "ClusterSelector",
    "ForestSelector",
    "GMeans",
    "GaussianBayesSelector",
    "KNNSelector",
    "PairwiseSelector",
    "TreeSelector",
    "anderson_darling",
    "load_model",
    "make_labels",
    "make_selector",
    "save_model",
    "train",
]

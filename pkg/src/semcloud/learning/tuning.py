"""Hyper-parameter grid search and minimal-training-data sweeps.

All splits are seeded uniform shuffles with an 80/20 train/test ratio.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import LearningError
from .metrics import nmae
from .models import (
    KNNModel,
    MLPModel,
    PolyRModel,
    TrainConfig,
    fit_knn,
    fit_mlp,
    fit_polyr,
    predict_knn,
    predict_mlp,
    predict_polyr,
)

METHODS = ("polyr", "mlp", "knn")

TRAIN_FRACTION = 0.8


@dataclass
class FitReport:
    method: str
    hyperparameters: dict
    nmae: float
    learning_time_ms: float = 0.0
    inference_time_ms: float = 0.0
    min_train_fraction: Optional[float] = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "hyperparameters": self.hyperparameters,
            "nmae": self.nmae,
            "learning_time_ms": self.learning_time_ms,
            "inference_time_ms": self.inference_time_ms,
            "min_train_fraction": self.min_train_fraction,
            "notes": self.notes,
        }


def train_test_split(X, y, seed: int, train_fraction: float = TRAIN_FRACTION):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    order = np.random.default_rng(seed).permutation(n)
    cut = max(1, min(n - 1, int(round(n * train_fraction))))
    tr, te = order[:cut], order[cut:]
    return X[tr], y[tr], X[te], y[te]


def fit_method(method: str, X, y, params: dict):
    if method == "polyr":
        return fit_polyr(X, y, degree=int(params["degree"]),
                         cross_terms=bool(params.get("cross_terms", False)))
    if method == "mlp":
        config = TrainConfig(
            epochs=int(params.get("epochs", 400)),
            step_size=float(params.get("step_size", 0.01)),
            batch_size=int(params.get("batch_size", 32)),
            seed=int(params.get("seed", 0)),
        )
        return fit_mlp(X, y, list(params["hidden_widths"]), config)
    if method == "knn":
        return fit_knn(X, y, k=int(params["k"]))
    raise LearningError(f"unknown method {method!r}")


def predict_method(model, X) -> np.ndarray:
    if isinstance(model, PolyRModel):
        return predict_polyr(model, X)
    if isinstance(model, MLPModel):
        return predict_mlp(model, X)
    if isinstance(model, KNNModel):
        return predict_knn(model, X)
    raise LearningError(f"unknown model type {type(model).__name__}")


def _model_size(method: str, params: dict, model) -> tuple:
    if method == "polyr":
        return (model.degree, model.n_weights)
    if method == "mlp":
        return (model.n_parameters,)
    return (model.k,)


def grid_search(method: str, grid, data, split_seed: int = 0):
    """Pick the hyper-parameters minimising held-out nmae.

    ``grid`` is a sequence of parameter dicts; ties break toward the smaller
    model (lower degree / fewer weights / smaller k).  Returns
    (best_params, best_model, FitReport).
    """
    grid = list(grid)
    if not grid:
        raise LearningError("empty hyper-parameter grid")
    X, y = data
    X_tr, y_tr, X_te, y_te = train_test_split(X, y, split_seed)

    best = None
    for params in grid:
        t0 = time.perf_counter()
        model = fit_method(method, X_tr, y_tr, params)
        learn_ms = (time.perf_counter() - t0) * 1e3
        t0 = time.perf_counter()
        pred = predict_method(model, X_te)
        infer_ms = (time.perf_counter() - t0) * 1e3 / max(len(y_te), 1)
        score = nmae(pred, y_te)
        key = (score, _model_size(method, params, model))
        if best is None or key < best[0]:
            best = (key, params, model, learn_ms, infer_ms)

    key, params, model, learn_ms, infer_ms = best
    report = FitReport(
        method=method,
        hyperparameters=dict(params),
        nmae=key[0],
        learning_time_ms=learn_ms,
        inference_time_ms=infer_ms,
    )
    if getattr(model, "rank_deficient", False):
        report.notes.append("rank-deficient design; minimum-norm solution")
    return params, model, report


def min_train_fraction_sweep(method: str, params: dict, data, target_nmae: float,
                             fractions, seeds=(0, 1, 2, 3, 4)):
    """Held-out nmae as a function of the training-data fraction.

    Each fraction is averaged over the seeded resamples.  Returns
    (curve, min_fraction) where curve is a list of (fraction, mean_nmae) and
    min_fraction is the smallest fraction reaching the target (None if the
    target is never reached).
    """
    fractions = sorted(fractions)
    if not fractions or not all(0 < f <= 1 for f in fractions):
        raise LearningError("fractions must lie in (0, 1]")
    X, y = data
    curve = []
    for fraction in fractions:
        scores = []
        for seed in seeds:
            X_tr, y_tr, X_te, y_te = train_test_split(X, y, seed)
            taken = max(2, int(round(fraction * len(y_tr))))
            keep = np.random.default_rng(seed + 7919).permutation(len(y_tr))[:taken]
            try:
                model = fit_method(method, X_tr[keep], y_tr[keep], params)
                scores.append(nmae(predict_method(model, X_te), y_te))
            except LearningError:
                scores.append(float("inf"))
        curve.append((fraction, float(np.mean(scores))))
    min_fraction = next((f for f, score in curve if score <= target_nmae), None)
    return curve, min_fraction

"""Prediction accuracy metrics."""

from __future__ import annotations

import numpy as np

from .errors import LearningError, ZeroMeanTruth


def nmae(predictions, truths) -> float:
    """Mean absolute error normalised by the mean of the ground truth.

    Scale-independent: nmae(a*pred, a*truth) == nmae(pred, truth) for a > 0.
    """
    pred = np.asarray(predictions, dtype=float).ravel()
    truth = np.asarray(truths, dtype=float).ravel()
    if pred.shape != truth.shape or pred.size == 0:
        raise LearningError(
            f"predictions and truths must be equal nonzero length, got {pred.size} / {truth.size}"
        )
    mean_truth = float(np.mean(truth))
    if mean_truth == 0.0:
        raise ZeroMeanTruth("ground-truth mean is zero; nmae undefined")
    mae = float(np.mean(np.abs(truth - pred)))
    return mae / mean_truth

from dataclasses import dataclass
from typing import Optional

import numpy as np

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.errors import LengthMismatch

LOGLOSS_CLIP = 1e-9


@dataclass(frozen=True)
class Metrics:
    mse: float
    mse_w: Optional[float] = None


def metrics(preds: FloatArray, targets: FloatArray, trials: Optional[FloatArray] = None) -> Metrics:
    """Menu-level MSE, plus the trial-weighted MSE when trial counts are given."""
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape:
        raise LengthMismatch(f"{preds.shape[0]} predictions for {targets.shape[0]} targets")
    squared = (preds - targets) ** 2
    mse_w = None
    if trials is not None:
        trials = np.asarray(trials, dtype=np.float64)
        if trials.shape != preds.shape:
            raise LengthMismatch(f"{trials.shape[0]} trial counts for {preds.shape[0]} predictions")
        mse_w = float(np.sum(trials * squared) / np.sum(trials))
    return Metrics(float(np.mean(squared)), mse_w)


def brier(probs: FloatArray, outcomes: FloatArray) -> float:
    return float(np.mean((np.asarray(probs) - np.asarray(outcomes)) ** 2))


def log_loss(probs: FloatArray, outcomes: FloatArray, clip: float = LOGLOSS_CLIP) -> float:
    g = np.clip(np.asarray(probs, dtype=np.float64), clip, 1.0 - clip)
    y = np.asarray(outcomes, dtype=np.float64)
    return float(np.mean(-(y * np.log(g) + (1.0 - y) * np.log(1.0 - g))))

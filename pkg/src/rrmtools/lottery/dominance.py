from enum import Enum

import numpy as np

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.lottery.lottery import Lottery

SURVIVAL_TOLERANCE = 1e-12


class DominanceResult(Enum):
    LEFT_STRICT = "LeftStrict"
    RIGHT_STRICT = "RightStrict"
    EQUIVALENT = "Equivalent"
    INCOMPARABLE = "Incomparable"

    @property
    def is_strict(self) -> bool:
        return self in (DominanceResult.LEFT_STRICT, DominanceResult.RIGHT_STRICT)


def survival(lottery: Lottery, grid: FloatArray) -> FloatArray:
    """Right-tail masses P(X >= z) at each grid point."""
    tail = np.concatenate([np.cumsum(lottery.ps[::-1])[::-1], [0.0]])
    return tail[np.searchsorted(lottery.xs, grid, side='left')]


def fsd_compare(a: Lottery, b: Lottery, epsilon: float = 0.0) -> DominanceResult:
    """
    First-order stochastic dominance between two canonical lotteries.

    `a` strictly dominates when its survival function weakly exceeds b's at every point of the
    merged support grid and the largest gap is strictly positive. With epsilon > 0 the largest
    gap must also reach epsilon, so raising epsilon can only turn strict verdicts into
    Incomparable.
    """
    grid = np.union1d(a.xs, b.xs)
    diff = survival(a, grid) - survival(b, grid)

    if np.all(np.abs(diff) <= SURVIVAL_TOLERANCE):
        return DominanceResult.EQUIVALENT

    threshold = max(epsilon, 0.0) - SURVIVAL_TOLERANCE
    if np.all(diff >= -SURVIVAL_TOLERANCE):
        gap = diff.max()
        if gap > SURVIVAL_TOLERANCE and gap >= threshold:
            return DominanceResult.LEFT_STRICT
        return DominanceResult.INCOMPARABLE

    if np.all(diff <= SURVIVAL_TOLERANCE):
        gap = -diff.min()
        if gap > SURVIVAL_TOLERANCE and gap >= threshold:
            return DominanceResult.RIGHT_STRICT

    return DominanceResult.INCOMPARABLE

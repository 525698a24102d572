from typing import Sequence

import numpy as np

from rrmtools.errors import LengthMismatch, NegativeProbability, ZeroMass
from rrmtools.lottery.lottery import Lottery


def contrast(x: float, y: float) -> float:
    """Normalized contrast |x - y| / (|x| + |y| + 1), in raw payoff units."""
    return abs(x - y) / (abs(x) + abs(y) + 1.0)


def product_state_space(a: Lottery, b: Lottery) -> list[tuple[float, float, float]]:
    """Independent coupling of two lotteries: (payoff_a, payoff_b, joint probability) per state."""
    return [(xa, xb, pa * pb) for xa, pa in zip(a.outcomes, a.probs) for xb, pb in zip(b.outcomes, b.probs)]


def product_arrays(a: Lottery, b: Lottery) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized `product_state_space`, row-major in (a, b)."""
    xa = np.repeat(a.xs, b.support_size)
    xb = np.tile(b.xs, a.support_size)
    p = np.outer(a.ps, b.ps).ravel()
    return xa, xb, p


def weighted_median(values: Sequence[float], weights: Sequence[float]) -> float:
    """Lower weighted median: smallest value whose cumulative weight reaches half the total."""
    if len(values) != len(weights):
        raise LengthMismatch(f"values and weights differ in length: {len(values)} != {len(weights)}")
    if len(values) == 0:
        raise LengthMismatch("weighted median of an empty sequence")

    vs = np.asarray(values, dtype=np.float64)
    ws = np.asarray(weights, dtype=np.float64)
    if np.any(ws < 0):
        raise NegativeProbability("weights must be non-negative")
    total = ws.sum()
    if total <= 0:
        raise ZeroMass("weights sum to zero")

    order = np.argsort(vs, kind='stable')
    cumulative = np.cumsum(ws[order])
    index = int(np.searchsorted(cumulative, 0.5 * total * (1.0 - 1e-12), side='left'))
    return float(vs[order][min(index, len(vs) - 1)])

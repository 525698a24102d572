from typing import Sequence

import numpy as np

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.errors import EmptyDataset, ValidationError
from rrmtools.lottery import Lottery, Menu, mode

GATE_FEATURE_NAMES: tuple[str, ...] = (
    "ev_gap", "max_gap", "min_gap", "var_gap", "mode_gap", "skew_gap",
    "ev_left", "ev_right", "sd_left", "sd_right", "max_abs_payoff", "support_gap",
)
RAW_SUPPORT = 10
RAW_FEATURE_NAMES: tuple[str, ...] = tuple(
    f"{side}_{kind}_{i + 1}" for side in ("left", "right") for kind in ("x", "p") for i in range(RAW_SUPPORT)
)


def rescale_factor(menus: Sequence[Menu]) -> float:
    """Largest absolute payoff across all menus; 1 when every payoff is zero."""
    if len(menus) == 0:
        raise EmptyDataset("rescale factor of an empty menu list")
    factor = max(menu.max_abs_payoff() for menu in menus)
    return factor if factor > 0 else 1.0


def _moments(lottery: Lottery) -> tuple[float, float, float, float, float, float]:
    return (lottery.expected_value(), lottery.max, lottery.min, lottery.variance(), mode(lottery),
            lottery.skewness())


def gate_features(menu: Menu, factor: float) -> FloatArray:
    """The 12 interpretable gate inputs, in GATE_FEATURE_NAMES order, on outcomes divided by `factor`."""
    if factor <= 0:
        raise ValidationError(f"rescale factor must be positive, got {factor}")
    left, right = menu.left.scaled(factor), menu.right.scaled(factor)
    ml, mr = _moments(left), _moments(right)
    gaps = [a - b for a, b in zip(ml, mr)]
    max_abs = max(abs(left.min), abs(left.max), abs(right.min), abs(right.max))
    return np.array(gaps + [ml[0], mr[0], left.std(), right.std(), max_abs,
                            float(left.support_size - right.support_size)])


def _raw_block(lottery: Lottery, size: int) -> list[float]:
    outcomes = list(lottery.outcomes[:size]) + [0.0] * max(size - lottery.support_size, 0)
    probs = list(lottery.probs[:size]) + [0.0] * max(size - lottery.support_size, 0)
    return outcomes + probs


def raw_encoding(menu: Menu, factor: float, max_support: int = RAW_SUPPORT) -> FloatArray:
    """
    Padded layout [left outcomes | left probs | right outcomes | right probs], each block of
    `max_support` slots; larger supports keep their smallest outcomes.
    """
    if factor <= 0:
        raise ValidationError(f"rescale factor must be positive, got {factor}")
    left, right = menu.left.scaled(factor), menu.right.scaled(factor)
    return np.array(_raw_block(left, max_support) + _raw_block(right, max_support))

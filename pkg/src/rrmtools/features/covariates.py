from dataclasses import dataclass

import numpy as np

from rrmtools.lottery import Lottery, Menu


@dataclass(frozen=True)
class MenuCovariates:
    tc: float
    risk_asym: float


def _cdf(lottery: Lottery, grid: np.ndarray) -> np.ndarray:
    cumulative = np.concatenate([[0.0], np.cumsum(lottery.ps)])
    return cumulative[np.searchsorted(lottery.xs, grid, side='right')]


def cdf_distance(left: Lottery, right: Lottery) -> float:
    """Integral of |F_left - F_right| over payoffs; exact because both CDFs are step functions."""
    grid = np.union1d(left.xs, right.xs)
    if grid.size < 2:
        return 0.0
    gaps = np.abs(_cdf(left, grid[:-1]) - _cdf(right, grid[:-1]))
    return float(gaps @ np.diff(grid))


def menu_covariates(menu: Menu) -> MenuCovariates:
    """Tradeoff complexity and risk asymmetry on raw payoffs."""
    excess = cdf_distance(menu.left, menu.right) - abs(menu.left.expected_value() - menu.right.expected_value())
    return MenuCovariates(
        tc=float(np.log1p(max(excess, 0.0))),
        risk_asym=abs(menu.left.std() - menu.right.std()),
    )

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from globalog import LOG

from rrmtools.errors import LengthMismatch
from rrmtools.lottery import Menu
from rrmtools.rules.rule_id import ALL_RULES, RuleId
from rrmtools.rules.rule_matrix import RuleMatrix, build_rule_matrix


@dataclass(frozen=True)
class ActivityPoint:
    epsilon: float
    mean_active: float
    mean_agreement: float
    n_scored: int

    @staticmethod
    def headers() -> list[str]:
        return ["epsilon", "mean_active_rules", "mean_agreement", "n_scored"]

    def as_row(self) -> list:
        return [self.epsilon, self.mean_active, self.mean_agreement, self.n_scored]


def side_agreement(matrix: RuleMatrix, rates: Sequence[float]) -> tuple[float, int]:
    """
    Share of active rules recommending the side most subjects chose, averaged over menus with a
    strict majority and at least one active rule.
    """
    rates = np.asarray(rates, dtype=np.float64)
    if rates.shape[0] != matrix.n_menus:
        raise LengthMismatch(f"{rates.shape[0]} rates for {matrix.n_menus} menus")
    majority_left = rates > 0.5
    scored = (rates != 0.5) & matrix.active.any(axis=1)
    if not scored.any():
        return float("nan"), 0
    agree = matrix.left == majority_left[:, None]
    share = (agree & matrix.active).sum(axis=1)[scored] / matrix.active.sum(axis=1)[scored]
    return float(share.mean()), int(scored.sum())


def activity_sweep(menus: Sequence[Menu], epsilons: Sequence[float], rules: Sequence[RuleId] = ALL_RULES,
                   rates: Optional[Sequence[float]] = None, threads: int = 1) -> list[ActivityPoint]:
    """Sensitivity of rule activity (and of active-rule agreement with observed majorities) to epsilon."""
    points = []
    for epsilon in epsilons:
        matrix = build_rule_matrix(menus, epsilon=epsilon, rules=rules, threads=threads)
        agreement, n_scored = (float("nan"), 0) if rates is None else side_agreement(matrix, rates)
        points.append(ActivityPoint(float(epsilon), matrix.mean_active_rules(), agreement, n_scored))
        LOG.info(f"epsilon={epsilon}: {points[-1].mean_active:.3f} active rules per menu, agreement {agreement:.3f}")
    return points

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from rrmtools.lottery import DominanceResult, Lottery, Menu, canonicalize, contrast, fsd_compare, mode, \
    product_arrays, weighted_median
from rrmtools.rules.rule_id import RuleId

PerceivedPair = tuple[Lottery, Lottery]


@dataclass(frozen=True)
class RuleOutcome:
    active: bool
    left: bool

    def __post_init__(self):
        if self.left and not self.active:
            raise ValueError("an inactive rule cannot recommend left")


INACTIVE = RuleOutcome(active=False, left=False)


class DecisionRule(ABC):
    """A parameter-free rule: maps a menu to a perceived pair of lotteries compared under FSD."""

    def __init__(self, rule_id: RuleId):
        self.rule_id = rule_id

    @abstractmethod
    def perceive(self, menu: Menu, big_m: float) -> Optional[PerceivedPair]:
        """Perceived (left, right) lotteries, or None when the rule is inactive by construction."""
        raise NotImplementedError()

    def evaluate(self, menu: Menu, epsilon: float, big_m: float) -> RuleOutcome:
        pair = self.perceive(menu, big_m)
        if pair is None:
            return INACTIVE

        if epsilon < 0:
            # all-active discipline: sides follow plain FSD, unranked pairs fall to the right
            return RuleOutcome(active=True, left=fsd_compare(*pair, 0.0) == DominanceResult.LEFT_STRICT)

        verdict = fsd_compare(*pair, epsilon)
        return RuleOutcome(active=verdict.is_strict, left=verdict == DominanceResult.LEFT_STRICT)


class RepresentativePayoffRule(DecisionRule):
    """Replaces each lottery by one representative payoff (worst, best, midpoint, mode)."""

    def __init__(self, rule_id: RuleId, payoff: Callable[[Lottery], float]):
        super().__init__(rule_id)
        self._payoff = payoff

    def perceive(self, menu: Menu, big_m: float) -> Optional[PerceivedPair]:
        return Lottery.degenerate(self._payoff(menu.left)), Lottery.degenerate(self._payoff(menu.right))


def salience_grid(menu: Menu) -> tuple[list[tuple[float, float]], np.ndarray]:
    """Extreme pairings in the fixed order (min,min), (min,max), (max,min), (max,max), with repeats."""
    left, right = menu.left, menu.right
    pairs = [(left.min, right.min), (left.min, right.max), (left.max, right.min), (left.max, right.max)]
    scores = np.array([contrast(a, b) for a, b in pairs])
    return pairs, scores


class SalienceRule(DecisionRule):
    def __init__(self, rule_id: RuleId, rank: int):
        super().__init__(rule_id)
        self.rank = rank

    def perceive(self, menu: Menu, big_m: float) -> Optional[PerceivedPair]:
        pairs, scores = salience_grid(menu)
        if self.rank == 1:
            k = int(np.argmax(scores))
        else:
            ordered = np.sort(scores)[::-1]
            if ordered[0] == ordered[1]:
                return None
            k = int(np.flatnonzero(scores == ordered[1])[0])

        a, b = pairs[k]
        return Lottery.degenerate(a), Lottery.degenerate(b)


def regrets(menu: Menu) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-state regret of choosing left, of choosing right, and the state probabilities."""
    x, y, p = product_arrays(menu.left, menu.right)
    return np.maximum(y - x, 0.0), np.maximum(x - y, 0.0), p


class RegretRule(DecisionRule):
    def perceive(self, menu: Menu, big_m: float) -> Optional[PerceivedPair]:
        regret_left, regret_right, p = regrets(menu)
        return canonicalize(-regret_left, p), canonicalize(-regret_right, p)


class MedianRegretRule(DecisionRule):
    def perceive(self, menu: Menu, big_m: float) -> Optional[PerceivedPair]:
        regret_left, regret_right, p = regrets(menu)
        return (Lottery.degenerate(-weighted_median(regret_left, p)),
                Lottery.degenerate(-weighted_median(regret_right, p)))


def downside_contrasts(lottery: Lottery) -> list[float]:
    """Contrasts between the mode and every payoff strictly below it, largest first."""
    peak = mode(lottery)
    return sorted((contrast(peak, z) for z in lottery.outcomes if z < peak), reverse=True)


def disappointment(lottery: Lottery, median: bool = False) -> float:
    downside = downside_contrasts(lottery)
    if not downside:
        return 0.0
    if median and len(downside) >= 2:
        return downside[1]
    return downside[0]


class DisappointmentRule(DecisionRule):
    def __init__(self, rule_id: RuleId, median: bool):
        super().__init__(rule_id)
        self.median = median

    def perceive(self, menu: Menu, big_m: float) -> Optional[PerceivedPair]:
        return (Lottery.degenerate(-disappointment(menu.left, self.median)),
                Lottery.degenerate(-disappointment(menu.right, self.median)))


class AttentionRule(DecisionRule):
    """Attends to one option only; the other is perceived as the sure loss -big_m."""

    def __init__(self, rule_id: RuleId, attend_left: bool):
        super().__init__(rule_id)
        self.attend_left = attend_left

    def perceive(self, menu: Menu, big_m: float) -> Optional[PerceivedPair]:
        penalty = Lottery.degenerate(-big_m)
        if self.attend_left:
            return menu.left, penalty
        return penalty, menu.right


class RuleFactory:
    @staticmethod
    def get_rule(rule_id: RuleId) -> DecisionRule:
        if rule_id == RuleId.MMn:
            return RepresentativePayoffRule(rule_id, lambda lot: lot.min)
        elif rule_id == RuleId.MMa:
            return RepresentativePayoffRule(rule_id, lambda lot: 0.5 * (lot.min + lot.max))
        elif rule_id == RuleId.MMx:
            return RepresentativePayoffRule(rule_id, lambda lot: lot.max)
        elif rule_id == RuleId.MAP:
            return RepresentativePayoffRule(rule_id, mode)
        elif rule_id == RuleId.SAL:
            return SalienceRule(rule_id, rank=1)
        elif rule_id == RuleId.SAL2:
            return SalienceRule(rule_id, rank=2)
        elif rule_id == RuleId.REG:
            return RegretRule(rule_id)
        elif rule_id == RuleId.REGmed:
            return MedianRegretRule(rule_id)
        elif rule_id == RuleId.DIS:
            return DisappointmentRule(rule_id, median=False)
        elif rule_id == RuleId.DISmed:
            return DisappointmentRule(rule_id, median=True)
        elif rule_id == RuleId.A1:
            return AttentionRule(rule_id, attend_left=True)
        elif rule_id == RuleId.A2:
            return AttentionRule(rule_id, attend_left=False)

        raise ValueError(f"Unsupported rule: {rule_id}")


_RULES = {rule_id: RuleFactory.get_rule(rule_id) for rule_id in RuleId}


def evaluate_rule(rule: RuleId, menu: Menu, epsilon: float, big_m: float) -> RuleOutcome:
    """
    Activity and side of one rule at one menu.

    Args:
        rule: the rule to evaluate
        menu: menu with canonical lotteries
        epsilon: dominance margin; a negative value selects the all-active discipline
        big_m: attention penalty, strictly above every absolute payoff

    Returns:
        RuleOutcome with `left` set only when the rule is active and ranks the left option higher
    """
    return _RULES[rule].evaluate(menu, epsilon, big_m)

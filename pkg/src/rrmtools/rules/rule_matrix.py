from dataclasses import dataclass
from typing import Sequence

import numpy as np
from globalog import LOG

from rrmtools.common.ext.typing_ext import BoolArray
from rrmtools.common.time_measure import DurationMeasure
from rrmtools.common.workers import map_jobs
from rrmtools.errors import EmptyDataset, LengthMismatch
from rrmtools.lottery import Menu
from rrmtools.rules.rule import RuleOutcome, evaluate_rule
from rrmtools.rules.rule_id import ALL_RULES, RuleId, sort_rules


@dataclass(frozen=True, eq=False)
class RuleMatrix:
    """
    Per-menu, per-rule activity (A) and left-recommendation (L) indicators.
    Rows follow `menu_ids`, columns follow `rules` in canonical order.
    """
    menu_ids: tuple[str, ...]
    rules: tuple[RuleId, ...]
    active: BoolArray
    left: BoolArray
    epsilon: float
    big_m: float

    def __post_init__(self):
        expected = (len(self.menu_ids), len(self.rules))
        if self.active.shape != expected or self.left.shape != expected:
            raise LengthMismatch(f"indicator arrays must have shape {expected}, "
                                 f"got {self.active.shape} and {self.left.shape}")
        if np.any(self.left & ~self.active):
            raise ValueError("left recommendation on an inactive rule")

    @property
    def n_menus(self) -> int:
        return len(self.menu_ids)

    @property
    def n_rules(self) -> int:
        return len(self.rules)

    @property
    def kappa_left(self) -> BoolArray:
        return self.active & self.left

    @property
    def kappa_right(self) -> BoolArray:
        return self.active & ~self.left

    def column(self, rule: RuleId) -> int:
        return self.rules.index(rule)

    def outcome(self, menu_index: int, rule: RuleId) -> RuleOutcome:
        j = self.column(rule)
        return RuleOutcome(bool(self.active[menu_index, j]), bool(self.left[menu_index, j]))

    def select(self, rules: Sequence[RuleId]) -> 'RuleMatrix':
        """Reduced library with the given rules, kept in canonical order."""
        rules = sort_rules(rules)
        missing = [rule.value for rule in rules if rule not in self.rules]
        if missing:
            raise ValueError(f"rules not in matrix: {missing}")
        columns = [self.column(rule) for rule in rules]
        return RuleMatrix(self.menu_ids, rules, self.active[:, columns], self.left[:, columns],
                          self.epsilon, self.big_m)

    def drop(self, rules: Sequence[RuleId]) -> 'RuleMatrix':
        dropped = set(rules)
        return self.select([rule for rule in self.rules if rule not in dropped])

    def take(self, indices: np.ndarray) -> 'RuleMatrix':
        """Row subset, e.g. the training menus of a fold."""
        indices = np.asarray(indices)
        return RuleMatrix(tuple(self.menu_ids[i] for i in indices), self.rules,
                          self.active[indices], self.left[indices], self.epsilon, self.big_m)

    def activity_counts(self) -> dict[RuleId, int]:
        return {rule: int(count) for rule, count in zip(self.rules, self.active.sum(axis=0))}

    def mean_active_rules(self) -> float:
        return float(self.active.sum(axis=1).mean())


def big_m_for(menus: Sequence[Menu]) -> float:
    return 10.0 * max(menu.max_abs_payoff() for menu in menus) + 1.0


def _evaluate_menu(menu: Menu, epsilon: float, big_m: float, rules: Sequence[RuleId]) -> tuple[list[bool], list[bool]]:
    outcomes = [evaluate_rule(rule, menu, epsilon, big_m) for rule in rules]
    return [o.active for o in outcomes], [o.left for o in outcomes]


def build_rule_matrix(
        menus: Sequence[Menu],
        epsilon: float = 0.0,
        rules: Sequence[RuleId] = ALL_RULES,
        big_m: float | None = None,
        threads: int = 1,
) -> RuleMatrix:
    """
    Evaluates every rule on every menu once.

    Args:
        menus: menus with canonical lotteries
        epsilon: dominance margin (negative selects the all-active discipline)
        rules: library to evaluate, canonical order enforced
        big_m: attention penalty; defaults to 10 * max |payoff| + 1 over `menus`
        threads: worker threads for the per-menu fan-out
    """
    if len(menus) == 0:
        raise EmptyDataset("cannot build a rule matrix without menus")

    rules = sort_rules(rules)
    big_m = big_m_for(menus) if big_m is None else big_m

    with DurationMeasure(action=f"rule matrix over {len(menus)} menus"):
        rows = map_jobs(lambda menu: _evaluate_menu(menu, epsilon, big_m, rules), menus, threads)

    active = np.array([row[0] for row in rows], dtype=bool).reshape(len(menus), len(rules))
    left = np.array([row[1] for row in rows], dtype=bool).reshape(len(menus), len(rules))
    matrix = RuleMatrix(tuple(menu.id for menu in menus), rules, active, left, float(epsilon), float(big_m))

    coverage = ", ".join(f"{rule.value}={count}" for rule, count in matrix.activity_counts().items())
    LOG.info(f"Rule activity counts (epsilon={epsilon}): {coverage}")
    return matrix

from dataclasses import dataclass

import numpy as np

from rrmtools.rules.rule_matrix import RuleMatrix


@dataclass(frozen=True)
class RuleCoverage:
    rule: str
    n_active: int
    pr_active: float
    pr_left_given_active: float
    pr_right_given_active: float
    switches_sides: bool

    @staticmethod
    def headers() -> list[str]:
        return ["rule", "n_active", "pr_active", "pr_left_given_active", "pr_right_given_active", "switches_sides"]

    def as_row(self) -> list:
        return [self.rule, self.n_active, self.pr_active, self.pr_left_given_active,
                self.pr_right_given_active, int(self.switches_sides)]


def rule_coverage(matrix: RuleMatrix) -> list[RuleCoverage]:
    rows = []
    for j, rule in enumerate(matrix.rules):
        active = matrix.active[:, j]
        n_active = int(active.sum())
        n_left = int(matrix.kappa_left[:, j].sum())
        n_right = n_active - n_left
        rows.append(RuleCoverage(
            rule=rule.value,
            n_active=n_active,
            pr_active=n_active / matrix.n_menus,
            pr_left_given_active=n_left / n_active if n_active else float('nan'),
            pr_right_given_active=n_right / n_active if n_active else float('nan'),
            switches_sides=n_left > 0 and n_right > 0,
        ))
    return rows

def two_sided_mask(matrix: RuleMatrix) -> np.ndarray:
    """Menus where some active rule recommends left and another recommends right."""
    return matrix.kappa_left.any(axis=1) & matrix.kappa_right.any(axis=1)


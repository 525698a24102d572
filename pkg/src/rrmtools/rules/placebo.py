from typing import Sequence

import numpy as np
from globalog import LOG

from rrmtools.errors import LengthMismatch, StrataTooFine, ValidationError
from rrmtools.features.binning import decile_bins
from rrmtools.lottery import Menu
from rrmtools.rules.rule_matrix import RuleMatrix


def complexity_strata(menus: Sequence[Menu], strata: int) -> np.ndarray:
    """Quantile strata of menu complexity, measured as the total number of support points."""
    counts = np.array([menu.support_count() for menu in menus], dtype=np.float64)
    if strata == 1:
        return np.zeros(len(menus), dtype=np.int64)
    return decile_bins(counts, strata).bins


def placebo_permute(matrix: RuleMatrix, menus: Sequence[Menu], strata: int = 10, seed: int = 0) -> RuleMatrix:
    """
    Placebo library: within each complexity stratum, every non-attention rule's (active, left)
    pairs are shuffled across menus independently of the other rules. A1/A2 stay in place, and
    per-stratum activity and left rates are preserved exactly.
    """
    if strata < 1:
        raise ValidationError(f"strata must be >= 1, got {strata}")
    if len(menus) != matrix.n_menus:
        raise LengthMismatch(f"{len(menus)} menus for a matrix of {matrix.n_menus} rows")

    labels = complexity_strata(menus, strata)
    groups = [np.flatnonzero(labels == b) for b in np.unique(labels)]
    small = [len(g) for g in groups if len(g) < 2]
    if small:
        raise StrataTooFine(f"{len(small)} complexity strata hold fewer than 2 menus")

    rng = np.random.default_rng(seed)
    active, left = matrix.active.copy(), matrix.left.copy()
    for j, rule in enumerate(matrix.rules):
        if rule.is_attention:
            continue
        for members in groups:
            shuffled = members[rng.permutation(len(members))]
            active[members, j] = matrix.active[shuffled, j]
            left[members, j] = matrix.left[shuffled, j]

    LOG.info(f"Placebo library built over {len(groups)} strata (seed={seed})")
    return RuleMatrix(matrix.menu_ids, matrix.rules, active, left, matrix.epsilon, matrix.big_m)

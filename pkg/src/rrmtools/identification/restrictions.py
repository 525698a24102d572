from dataclasses import dataclass
from typing import Sequence

import numpy as np

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.errors import LengthMismatch, MissingChoiceRate, ValidationError
from rrmtools.lottery import Menu
from rrmtools.rules import RuleMatrix, RuleOutcome

DEFAULT_TRIM = 1e-4


@dataclass(frozen=True, eq=False)
class RestrictionRow:
    menu_id: str
    h: FloatArray
    r: float


def _check_trim(trim: float):
    if not (0.0 < trim < 0.5):
        raise ValidationError(f"trim must lie in (0, 0.5), got {trim}")


def odds(rates: FloatArray, trim: float) -> FloatArray:
    _check_trim(trim)
    clipped = np.clip(np.asarray(rates, dtype=np.float64), trim, 1.0 - trim)
    return clipped / (1.0 - clipped)


def restriction_row(menu: Menu, rule_row: Sequence[RuleOutcome], trim: float = DEFAULT_TRIM) -> RestrictionRow:
    """h_f = kappa_left_f - r * kappa_right_f with r the trimmed observed odds of choosing left."""
    if menu.choice_rate is None:
        raise MissingChoiceRate(f"menu {menu.id} has no choice rate")
    r = float(odds(np.array([menu.choice_rate]), trim)[0])
    kappa_left = np.array([o.active and o.left for o in rule_row], dtype=np.float64)
    kappa_right = np.array([o.active and not o.left for o in rule_row], dtype=np.float64)
    return RestrictionRow(menu.id, kappa_left - r * kappa_right, r)


def restriction_matrix(rates: FloatArray, matrix: RuleMatrix, trim: float = DEFAULT_TRIM) -> tuple[FloatArray, FloatArray]:
    """Stacked restriction rows (T x F) and the odds vector for every menu of `matrix`."""
    if len(rates) != matrix.n_menus:
        raise LengthMismatch(f"{len(rates)} rates for {matrix.n_menus} menus")
    r = odds(rates, trim)
    h = matrix.kappa_left.astype(np.float64) - r[:, None] * matrix.kappa_right.astype(np.float64)
    return h, r

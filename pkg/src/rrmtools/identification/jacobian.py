from dataclasses import dataclass
from typing import Optional

import numpy as np

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.errors import NoTwoSidedMenus
from rrmtools.gate.params import GateParams
from rrmtools.identification.rank import RANK_RTOL, effective_basis, numerical_rank
from rrmtools.rules import RuleId, RuleMatrix, two_sided_mask


@dataclass(frozen=True, eq=False)
class JacobianRank:
    rank: int
    n_columns: int
    n_columns_effective: int
    n_rows: int
    singular_values: FloatArray

    @property
    def full_column_rank(self) -> bool:
        return self.rank == self.n_columns

    @property
    def full_effective_rank(self) -> bool:
        return self.rank >= self.n_columns_effective


def _side_shares(logits: FloatArray, side: FloatArray) -> FloatArray:
    shifted = np.where(side > 0, logits, -np.inf)
    weights = np.exp(shifted - shifted.max(axis=1, keepdims=True))
    return weights / weights.sum(axis=1, keepdims=True)


def log_odds(params: GateParams, features: FloatArray, matrix: RuleMatrix) -> FloatArray:
    """Log of gate mass on left-recommending over right-recommending rules, at two-sided menus only."""
    two_sided = two_sided_mask(matrix)
    logits = params.logits(np.asarray(features, dtype=np.float64)[two_sided])

    def side_lse(side: np.ndarray) -> FloatArray:
        top = np.where(side, logits, -np.inf).max(axis=1)
        return top + np.log(np.sum(np.exp(np.where(side, logits - top[:, None], -np.inf)), axis=1))

    return side_lse(matrix.kappa_left[two_sided]) - side_lse(matrix.kappa_right[two_sided])


def _baseline(params: GateParams) -> RuleId:
    if params.baseline is not None:
        return params.baseline
    return RuleId.A1 if RuleId.A1 in params.rules else params.rules[0]


def log_odds_jacobian(params: GateParams, features: FloatArray, matrix: RuleMatrix,
                      baseline: Optional[RuleId] = None) -> FloatArray:
    """
    Derivatives of the log-odds at each two-sided menu in the free parameters: for every rule other
    than the baseline, d/d alpha_f = s_left_f - s_right_f and d/d beta_f = (s_left_f - s_right_f) z,
    where s_side is the within-side softmax share. Columns are [alpha_f, beta_f] blocks in rule order.
    """
    two_sided = two_sided_mask(matrix)
    if not two_sided.any():
        raise NoTwoSidedMenus("the Jacobian needs at least one two-sided menu")

    z = np.asarray(features, dtype=np.float64)[two_sided]
    logits = params.logits(z)
    s_left = _side_shares(logits, matrix.kappa_left[two_sided].astype(np.float64))
    s_right = _side_shares(logits, matrix.kappa_right[two_sided].astype(np.float64))
    diff = s_left - s_right

    baseline = baseline or _baseline(params)
    blocks = []
    for j, rule in enumerate(params.rules):
        if rule == baseline:
            continue
        blocks.append(diff[:, j:j + 1])
        blocks.append(diff[:, j:j + 1] * z)
    return np.hstack(blocks)


def jacobian_local_rank(params: GateParams, features: FloatArray, matrix: RuleMatrix,
                        baseline: Optional[RuleId] = None, rtol: float = RANK_RTOL) -> JacobianRank:
    """SVD rank of the stacked log-odds Jacobian against K = (F - 1)(1 + d) and its d_eff counterpart."""
    jacobian = log_odds_jacobian(params, features, matrix, baseline)
    rank, s = numerical_rank(jacobian, rtol)
    n_free = params.n_rules - 1
    d_eff = effective_basis(features).d_eff
    return JacobianRank(rank, jacobian.shape[1], n_free * (1 + d_eff), jacobian.shape[0], s)

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from globalog import LOG

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.errors import ValidationError
from rrmtools.identification import CellSystem
from rrmtools.rules import RuleId

DEFAULT_FLOOR = 1e-8
MOVEMENT_TOL = 1e-10
MAX_ITER = 100_000


@dataclass(frozen=True, eq=False)
class CellWeights:
    """Normalized rule weights of one cell: omega[baseline] = 1, every other entry >= floor."""
    cell_id: int
    rules: tuple[RuleId, ...]
    omega: FloatArray
    residual_norm: float
    active_constraints: tuple[RuleId, ...]
    converged: bool
    iterations: int

    def log_weights(self, baseline: RuleId) -> FloatArray:
        """log omega for the non-baseline rules, in rule order."""
        keep = [j for j, rule in enumerate(self.rules) if rule != baseline]
        return np.log(self.omega[keep])


def _objective(a: FloatArray, b: FloatArray, x: FloatArray) -> float:
    r = b + a @ x
    return float(r @ r)


def solve_normalized_qp(
        h: FloatArray,
        baseline_index: int,
        floor: float = DEFAULT_FLOOR,
        closed_form_first: bool = True,
        tol: float = MOVEMENT_TOL,
        max_iter: int = MAX_ITER,
) -> tuple[FloatArray, bool, int]:
    """
    min ||h @ omega||^2  subject to  omega[baseline] = 1, omega >= floor elsewhere.

    When the unconstrained least-squares solution is unique and feasible it is returned directly;
    otherwise accelerated projected gradient (step 1/L, restart on objective increase) runs from the
    uniform start until the iterate moves less than `tol`.
    Returns (omega, converged, iterations).
    """
    if floor <= 0:
        raise ValidationError(f"floor must be positive, got {floor}")
    h = np.atleast_2d(np.asarray(h, dtype=np.float64))
    n_rules = h.shape[1]
    free = np.array([j for j in range(n_rules) if j != baseline_index])
    b = h[:, baseline_index]
    a = h[:, free]

    def assemble(x: FloatArray) -> FloatArray:
        omega = np.ones(n_rules)
        omega[free] = x
        return omega

    start = np.ones(len(free))
    sigma_max = np.linalg.norm(a, 2) if a.size else 0.0
    if sigma_max == 0.0:
        return assemble(np.maximum(start, floor)), True, 0

    if closed_form_first:
        x_ls, _, rank, _ = np.linalg.lstsq(a, -b, rcond=None)
        if rank == len(free) and np.all(x_ls >= floor):
            return assemble(x_ls), True, 0

    step = 1.0 / (2.0 * sigma_max ** 2)
    x = np.maximum(start, floor)
    y = x.copy()
    t = 1.0
    f_x = _objective(a, b, x)
    for iteration in range(1, max_iter + 1):
        grad = 2.0 * a.T @ (b + a @ y)
        x_new = np.maximum(y - step * grad, floor)
        f_new = _objective(a, b, x_new)
        movement = float(np.linalg.norm(x_new - x))
        if f_new > f_x:
            # restart momentum from the last iterate
            t = 1.0
            y = x.copy()
            continue
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, f_x, t = x_new, f_new, t_new
        if movement < tol:
            return assemble(x), True, iteration

    return assemble(x), False, max_iter


def cell_weights(
        cell: CellSystem,
        rules: Sequence[RuleId],
        baseline: RuleId = RuleId.A1,
        floor: float = DEFAULT_FLOOR,
        closed_form_first: bool = True,
) -> CellWeights:
    rules = tuple(rules)
    if cell.n_rows < 1:
        raise ValidationError(f"cell {cell.cell_id} has no restriction rows")
    return weights_from_rows(cell.h, rules, baseline, floor, cell.cell_id, closed_form_first)


def weights_from_rows(
        h: FloatArray,
        rules: tuple[RuleId, ...],
        baseline: RuleId,
        floor: float = DEFAULT_FLOOR,
        cell_id: int = 0,
        closed_form_first: bool = True,
) -> CellWeights:
    b = rules.index(baseline)
    omega, converged, iterations = solve_normalized_qp(h, b, floor, closed_form_first)
    if not converged:
        LOG.warning(f"cell {cell_id}: projected gradient stopped at the iteration cap ({iterations})")
    at_floor = tuple(rule for j, rule in enumerate(rules) if j != b and omega[j] <= floor * (1.0 + 1e-9))
    return CellWeights(cell_id, rules, omega, float(np.linalg.norm(h @ omega)), at_floor, converged, iterations)

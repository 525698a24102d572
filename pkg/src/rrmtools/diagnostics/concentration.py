from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.errors import NotSimplex
from rrmtools.rules import RuleId

SIMPLEX_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class ConcentrationReport:
    hhi: float
    n_eff: float
    weights: FloatArray
    rules: Optional[tuple[RuleId, ...]] = None

    def as_dict(self) -> dict:
        out = {"hhi": self.hhi, "n_eff": self.n_eff}
        if self.rules is not None:
            out["weights"] = {rule.value: float(w) for rule, w in zip(self.rules, self.weights)}
        return out


def concentration(weights: Sequence[float], rules: Optional[Sequence[RuleId]] = None) -> ConcentrationReport:
    """Herfindahl index of responsibility weights and the implied effective number of rules."""
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0 or not np.all(np.isfinite(w)) or np.any(w < -SIMPLEX_TOLERANCE) \
            or abs(w.sum() - 1.0) > SIMPLEX_TOLERANCE:
        raise NotSimplex(f"weights are not on the simplex (sum={w.sum() if w.size else 0.0})")
    hhi = float(np.sum(w ** 2))
    return ConcentrationReport(hhi, 1.0 / hhi, w, None if rules is None else tuple(rules))

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy.stats import spearmanr

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.diagnostics.ablation import AblationReport
from rrmtools.errors import LengthMismatch, ValidationError
from rrmtools.rules import RuleId


@dataclass(frozen=True, eq=False)
class StabilityReport:
    rules: tuple[RuleId, ...]
    mean: FloatArray
    sd: FloatArray
    cv: FloatArray
    spearman_mean: float
    spearman_min: float
    spearman_max: float
    phi_mean: Optional[dict[str, float]] = None
    phi_sd: Optional[dict[str, float]] = None

    @staticmethod
    def headers() -> list[str]:
        return ["rule", "mean_w", "sd_w", "cv_w", "mean_phi", "sd_phi"]

    def rows(self) -> list[list]:
        out = []
        for j, rule in enumerate(self.rules):
            phi_mean = None if self.phi_mean is None else self.phi_mean.get(rule.value)
            phi_sd = None if self.phi_sd is None else self.phi_sd.get(rule.value)
            out.append([rule.value, float(self.mean[j]), float(self.sd[j]), float(self.cv[j]), phi_mean, phi_sd])
        return out


def decomposition_stability(rules: Sequence[RuleId], fold_weights: Sequence[Sequence[float]],
                            ablation: Optional[AblationReport] = None) -> StabilityReport:
    """Spread of responsibility weights across splits and the rank agreement between splits."""
    w = np.asarray(fold_weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] < 2:
        raise ValidationError("stability needs weights from at least two splits")
    if w.shape[1] != len(rules):
        raise LengthMismatch(f"{w.shape[1]} weights per split for {len(rules)} rules")

    mean = w.mean(axis=0)
    sd = w.std(axis=0, ddof=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cv = np.where(mean > 0, sd / mean, np.nan)
    rhos = [spearmanr(w[a], w[b])[0] for a, b in combinations(range(len(w)), 2)]
    rhos = np.array([rho for rho in rhos if np.isfinite(rho)])

    phi_mean = phi_sd = None
    if ablation is not None:
        per_rule = {entry.rule.value: np.array(ablation.fold_phi(entry.rule)) for entry in ablation.entries}
        phi_mean = {rule: float(values.mean()) for rule, values in per_rule.items()}
        phi_sd = {rule: float(values.std(ddof=1)) if len(values) > 1 else 0.0 for rule, values in per_rule.items()}

    nan = float("nan")
    return StabilityReport(
        rules=tuple(rules),
        mean=mean,
        sd=sd,
        cv=cv,
        spearman_mean=float(rhos.mean()) if rhos.size else nan,
        spearman_min=float(rhos.min()) if rhos.size else nan,
        spearman_max=float(rhos.max()) if rhos.size else nan,
        phi_mean=phi_mean,
        phi_sd=phi_sd,
    )

from dataclasses import dataclass

import numpy as np
from globalog import LOG

from rrmtools.common.ext.typing_ext import FloatArray, IntArray
from rrmtools.data_manage.dataset import Dataset
from rrmtools.features import decile_bins
from rrmtools.features.matrix import covariate_matrix
from rrmtools.gate import GateParams, predict_batch
from rrmtools.rules import RuleId, RuleMatrix

COVARIATES = ("tc", "risk_asym")
EFFECTIVE = "effective"
LATENT = "latent"


@dataclass(frozen=True, eq=False)
class StaticsReport:
    """Per-bin mean effective weights q_tilde and latent gate outputs q, bins ordered by the covariate."""
    covariate: str
    rules: tuple[RuleId, ...]
    bin_means: FloatArray
    counts: IntArray
    effective: FloatArray
    latent: FloatArray
    n_excluded: int
    degenerate: bool

    @staticmethod
    def headers() -> list[str]:
        return ["bin", "rule", "mean_weight", "kind"]

    def long_rows(self) -> list[list]:
        rows = []
        for b in range(len(self.counts)):
            for kind, values in ((EFFECTIVE, self.effective), (LATENT, self.latent)):
                rows += [[b, rule.value, float(values[b, j]), kind] for j, rule in enumerate(self.rules)]
        return rows


def comparative_statics(params: GateParams, dataset: Dataset, features: FloatArray, matrix: RuleMatrix,
                        covariate: str = "tc", k_bins: int = 10) -> StaticsReport:
    """Mean responsibilities across quantile bins of a menu covariate. Guard-hit menus are left out."""
    if covariate not in COVARIATES:
        raise ValueError(f"Unsupported covariate: {covariate}")
    values = covariate_matrix(dataset)[covariate]
    assignment = decile_bins(values, k_bins)
    batch = predict_batch(params, features, matrix)
    keep = ~batch.guard_hit
    n_excluded = int(batch.guard_hit.sum())
    if n_excluded:
        LOG.warning(f"{n_excluded} guard-hit menus excluded from comparative statics")

    n_bins = assignment.n_bins
    effective = np.full((n_bins, params.n_rules), np.nan)
    latent = np.full((n_bins, params.n_rules), np.nan)
    counts = np.zeros(n_bins, dtype=np.int64)
    bin_means = np.zeros(n_bins)
    for b in range(n_bins):
        members = assignment.members(b)
        bin_means[b] = float(values[members].mean())
        kept = members[keep[members]]
        counts[b] = len(kept)
        if len(kept):
            effective[b] = batch.q_tilde[kept].mean(axis=0)
            latent[b] = batch.q[kept].mean(axis=0)
    return StaticsReport(covariate, params.rules, bin_means, counts, effective, latent, n_excluded,
                         assignment.degenerate)

from dataclasses import dataclass

import numpy as np
from globalog import LOG

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.data_manage.dataset import Dataset
from rrmtools.features.matrix import feature_matrix
from rrmtools.gate.model import PredictionBatch, predict_batch
from rrmtools.gate.params import GateParams
from rrmtools.rules import RuleId, RuleMatrix, build_rule_matrix


@dataclass(frozen=True, eq=False)
class ResponsibilityReport:
    """
    Population summaries of a gate over a menu sample. `weights` are the average
    conditional-on-activity shares w_f; `latent` the average gate output q_f; `active_mass`
    the average q_f * A_f (the part of q_f that reaches the mixture).
    """
    rules: tuple[RuleId, ...]
    weights: FloatArray
    latent: FloatArray
    active_mass: FloatArray
    n_menus: int
    n_excluded: int

    def as_dict(self) -> dict[str, float]:
        return {rule.value: float(w) for rule, w in zip(self.rules, self.weights)}

    def rows(self) -> list[list]:
        return [[rule.value, float(w), float(q), float(a)]
                for rule, w, q, a in zip(self.rules, self.weights, self.latent, self.active_mass)]

    @staticmethod
    def headers() -> list[str]:
        return ["rule", "w_effective", "q_latent", "active_mass"]


def summarize(rules: tuple[RuleId, ...], batch: PredictionBatch, active: np.ndarray) -> ResponsibilityReport:
    keep = ~batch.guard_hit
    n_excluded = int(batch.guard_hit.sum())
    if n_excluded:
        LOG.warning(f"{n_excluded} menus hit the activity guard and are excluded from responsibilities")
    if not keep.any():
        nan = np.full(len(rules), np.nan)
        return ResponsibilityReport(rules, nan, nan, nan, len(batch), n_excluded)
    return ResponsibilityReport(
        rules=rules,
        weights=batch.q_tilde[keep].mean(axis=0),
        latent=batch.q[keep].mean(axis=0),
        active_mass=(batch.q * active)[keep].mean(axis=0),
        n_menus=len(batch),
        n_excluded=n_excluded,
    )


def responsibilities(params: GateParams, features: FloatArray, matrix: RuleMatrix) -> ResponsibilityReport:
    """Average conditional-on-activity weight per rule; guard-hit menus are excluded and counted."""
    return summarize(params.rules, predict_batch(params, features, matrix), matrix.active)


def latent_vs_effective(params: GateParams, dataset: Dataset, threads: int = 1) -> ResponsibilityReport:
    """Latent q_f, active mass and effective w_f side by side for frozen params on a dataset."""
    features = feature_matrix(dataset, params.encoding, factor=params.rescale_factor)
    matrix = build_rule_matrix(dataset.menus, epsilon=params.epsilon, rules=params.rules, threads=threads)
    return responsibilities(params, features, matrix)

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from globalog import LOG

from rrmtools.common.time_measure import DurationMeasure, TimeUnit
from rrmtools.common.workers import map_jobs
from rrmtools.data_manage.dataset import Dataset
from rrmtools.diagnostics.concentration import concentration
from rrmtools.errors import ValidationError
from rrmtools.evaluation import FittedGate, FoldFit, RuleGatingModel, Split, SplitPlan, fit_fold, make_splits
from rrmtools.rules import RuleId


@dataclass(frozen=True)
class AblationEntry:
    rule: RuleId
    phi: float
    delta_mse: float
    se_delta: float
    sigma_n: float
    n_eff: float
    fold_mse: list[float] = field(default_factory=list)
    fold_delta: list[float] = field(default_factory=list)

    @staticmethod
    def headers() -> list[str]:
        return ["rule", "phi", "delta_mse", "se_delta", "sigma_n", "n_eff"]

    def as_row(self) -> list:
        return [self.rule.value, self.phi, self.delta_mse, self.se_delta, self.sigma_n, self.n_eff]


@dataclass(frozen=True)
class AblationReport:
    full_mse: float
    n_eff: float
    fold_mse: list[float]
    entries: list[AblationEntry]
    rules: tuple[RuleId, ...] = ()
    fold_weights: list[list[float]] = field(default_factory=list)

    def fold_phi(self, rule: RuleId) -> list[float]:
        """Per-fold relative MSE change from dropping `rule`."""
        entry = next(e for e in self.entries if e.rule == rule)
        return [d / full for d, full in zip(entry.fold_delta, self.fold_mse)]


def _weights(fitted: FittedGate, rows: np.ndarray) -> np.ndarray:
    return fitted.responsibilities(rows).weights


def ablate(
        dataset: Dataset,
        model: RuleGatingModel,
        plan: SplitPlan,
        learning_rate: float,
        rules: Optional[Sequence[RuleId]] = None,
        threads: int = 1,
) -> AblationReport:
    """
    Refit-and-compare ablation. For every rule the gate is retrained on each split without it; the
    paired per-split test MSE change gives delta_mse and phi = mean delta / mean full MSE. The same
    refits give the relative change in the effective number of rules (responsibilities over all
    menus, averaged across splits). Attention rules cannot be ablated.
    """
    library = model.matrix.rules
    rules = [rule for rule in library if not rule.is_attention] if rules is None else list(rules)
    for rule in rules:
        if rule.is_attention:
            raise ValidationError(f"attention rule {rule.value} cannot be ablated")
        if rule not in library:
            raise ValidationError(f"rule {rule.value} is not in the fitted library")

    targets = dataset.targets()
    splits = make_splits(len(dataset), plan)
    every_row = np.arange(len(dataset))

    def job(item: tuple[Optional[RuleId], Split]) -> tuple[FoldFit, np.ndarray]:
        rule, split = item
        reduced = model if rule is None else model.with_matrix(model.matrix.drop([rule]))
        fit = fit_fold(reduced, targets, split, learning_rate)
        return fit, _weights(fit.fitted, every_row)

    items = [(None, split) for split in splits] + [(rule, split) for rule in rules for split in splits]
    with DurationMeasure(action=f"ablation of {len(rules)} rules over {len(splits)} splits", unit=TimeUnit.SECONDS):
        results = map_jobs(job, items, threads)

    n = len(splits)
    full = np.array([fit.test_mse for fit, _ in results[:n]])
    n_eff_full = float(np.mean([concentration(w).n_eff for _, w in results[:n]]))
    entries = []
    for i, rule in enumerate(rules):
        chunk = results[(i + 1) * n:(i + 2) * n]
        reduced = np.array([fit.test_mse for fit, _ in chunk])
        delta = reduced - full
        n_eff = float(np.mean([concentration(w).n_eff for _, w in chunk]))
        entries.append(AblationEntry(
            rule=rule,
            phi=float(delta.mean() / full.mean()),
            delta_mse=float(delta.mean()),
            se_delta=float(delta.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
            sigma_n=(n_eff - n_eff_full) / n_eff_full,
            n_eff=n_eff,
            fold_mse=reduced.tolist(),
            fold_delta=delta.tolist(),
        ))
        LOG.info(f"Dropping {rule.value}: phi={entries[-1].phi:+.4f}, delta MSE={entries[-1].delta_mse:+.5f}")
    return AblationReport(float(full.mean()), n_eff_full, full.tolist(), entries, library,
                          [w.tolist() for _, w in results[:n]])
